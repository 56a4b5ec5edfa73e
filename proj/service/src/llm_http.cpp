#include "lab/service/llm_http.hpp"

#include <httplib.h>

#include <fmt/format.h>

#include "lab/json_util.hpp"

namespace lab::service {

std::string HttpLlmTransport::complete(const dsl::LlmClientConfig& config, const nlohmann::json& request) {
    const std::string& endpoint = config.endpoint;
    const auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigurationError(fmt::format("LLM endpoint '{}' has no scheme", endpoint), "LAB_LLM_ENDPOINT");
    }
    const auto path_start = endpoint.find('/', scheme_end + 3);
    const std::string origin = endpoint.substr(0, path_start);
    std::string path = path_start == std::string::npos ? std::string() : endpoint.substr(path_start);
    while (!path.empty() && path.back() == '/') path.pop_back();
    const std::string suffix = "/chat/completions";
    if (path.size() < suffix.size() || path.compare(path.size() - suffix.size(), suffix.size(), suffix) != 0) {
        path += suffix;
    }

    httplib::Client client(origin);
    const auto seconds = static_cast<time_t>(config.timeout.count());
    client.set_connection_timeout(seconds, 0);
    client.set_read_timeout(seconds, 0);
    client.set_write_timeout(seconds, 0);
    client.set_bearer_token_auth(config.api_key);
    auto result = client.Post(path, canonical_dump(request), "application/json");
    if (!result) {
        throw dsl::TransportError(fmt::format("LLM request to {} failed: {}", origin, httplib::to_string(result.error())));
    }
    if (result->status < 200 || result->status >= 300) {
        throw dsl::TransportError(fmt::format("LLM endpoint answered HTTP {}: {}", result->status, result->body));
    }
    return result->body;
}

}  // namespace lab::service
