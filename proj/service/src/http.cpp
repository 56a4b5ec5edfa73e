#include "lab/service/http.hpp"

#include <httplib.h>

namespace lab::service {

struct HttpServer::Impl {
    explicit Impl(Service& s) : service(s) {}

    Service& service;
    httplib::Server server;
};

namespace {

Request to_request(const httplib::Request& req) {
    Request out;
    out.method = req.method;
    out.path = req.path;
    out.body = req.body;
    for (const auto& [k, v] : req.params) out.query.emplace(k, v);
    return out;
}

void write(const Response& r, httplib::Response& res) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
}

bool is_event_stream(const std::string& path, std::string& run_id) {
    const std::string prefix = "/api/runs/";
    const std::string suffix = "/events";
    if (path.size() <= prefix.size() + suffix.size()) return false;
    if (path.compare(0, prefix.size(), prefix) != 0) return false;
    if (path.compare(path.size() - suffix.size(), suffix.size(), suffix) != 0) return false;
    run_id = path.substr(prefix.size(), path.size() - prefix.size() - suffix.size());
    return run_id.find('/') == std::string::npos;
}

}  // namespace

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {
    auto& server = impl_->server;
    Service* svc = &service;

    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    server.Options(".*", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type, Last-Event-ID");
        res.status = 204;
    });

    server.Get(".*", [svc](const httplib::Request& req, httplib::Response& res) {
        std::string run_id;
        if (is_event_stream(req.path, run_id)) {
            std::shared_ptr<EventCursor> cursor = svc->subscribe(run_id);
            if (!cursor) {
                write(error_response(404, "not_found", "unknown run '" + run_id + "'"), res);
                return;
            }
            res.set_header("Cache-Control", "no-cache");
            auto sequence = std::make_shared<std::size_t>(0);
            res.set_chunked_content_provider("text/event-stream", [cursor, sequence](std::size_t, httplib::DataSink& sink) {
                if (cursor->finished()) {
                    sink.done();
                    return true;
                }
                if (auto event = cursor->next(std::chrono::milliseconds(500))) {
                    const std::string text = format_sse(*event, (*sequence)++);
                    if (!sink.write(text.data(), text.size())) return false;
                } else if (!cursor->finished()) {
                    static const std::string keepalive = ": keepalive\n\n";
                    if (!sink.write(keepalive.data(), keepalive.size())) return false;
                }
                if (cursor->finished()) sink.done();
                return true;
            });
            return;
        }
        write(svc->handle(to_request(req)), res);
    });
    auto dispatch = [svc](const httplib::Request& req, httplib::Response& res) { write(svc->handle(to_request(req)), res); };
    server.Post(".*", dispatch);
    server.Put(".*", dispatch);
    server.Delete(".*", dispatch);
    server.Patch(".*", dispatch);
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int HttpServer::bind_to_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace lab::service
