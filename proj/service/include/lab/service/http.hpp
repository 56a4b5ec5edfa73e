#pragma once

#include <memory>
#include <string>

#include "lab/service/service.hpp"

namespace lab::service {

/// cpp-httplib binding of Service. Event streams are served as text/event-stream.
class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();

    /// Blocks until stop().
    bool listen(const std::string& host, int port);
    /// Binds an ephemeral port; follow with listen_after_bind().
    int bind_to_any_port(const std::string& host);
    bool listen_after_bind();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace lab::service
