#pragma once

#include <chrono>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "lab/errors.hpp"
#include "lab/formulation/source.hpp"

namespace lab::dsl {

struct LlmClientConfig {
    std::string endpoint;  // base URL of an OpenAI-compatible API
    std::string model;
    std::string api_key;
    std::chrono::seconds timeout{60};

    /// Reads LAB_LLM_ENDPOINT, LAB_LLM_MODEL, LAB_LLM_API_KEY and LAB_LLM_TIMEOUT_S.
    static LlmClientConfig from_environment();
};

class TransportError : public Error {
public:
    using Error::Error;
};

/// Raised when the reply holds no usable problem document; keeps the reply.
class ExtractionError : public Error {
public:
    ExtractionError(const std::string& message, std::string raw_response)
        : Error(message), raw_response_(std::move(raw_response)) {}
    const std::string& raw_response() const noexcept { return raw_response_; }

private:
    std::string raw_response_;
};

/// Sends one chat-completion request and returns the raw response body.
class LlmTransport {
public:
    virtual ~LlmTransport() = default;
    virtual std::string complete(const LlmClientConfig& config, const nlohmann::json& request) = 0;
    /// Offline transports skip the endpoint and credential checks.
    virtual bool requires_credentials() const { return true; }
};

/// Returns a canned response body; never touches the network.
class FixtureTransport : public LlmTransport {
public:
    explicit FixtureTransport(std::string response) : response_(std::move(response)) {}
    static std::unique_ptr<FixtureTransport> from_file(const std::string& path);

    std::string complete(const LlmClientConfig&, const nlohmann::json& request) override {
        last_request_ = request;
        return response_;
    }
    bool requires_credentials() const override { return false; }
    const nlohmann::json& last_request() const noexcept { return last_request_; }

private:
    std::string response_;
    nlohmann::json last_request_;
};

/// System prompt: grammar, document schema and examples.
const std::string& system_prompt();

nlohmann::json build_chat_request(const LlmClientConfig& config, const std::string& prompt);

/// Pulls the problem document out of a response body. Accepts a chat
/// completion envelope or bare content; inside the content a fenced json block
/// wins over the first balanced JSON object.
ProblemSource extract_problem_source(const std::string& response_body);

/// Missing endpoint or credential raises ConfigurationError before the
/// transport is called. The result is tagged with provenance llm and the
/// prompt; it is never registered here.
ProblemSource llm_generate(const std::string& prompt, const LlmClientConfig& config, LlmTransport& transport);

}  // namespace lab::dsl
