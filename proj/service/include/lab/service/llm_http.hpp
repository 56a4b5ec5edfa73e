#pragma once

#include "lab/formulation/llm.hpp"

namespace lab::service {

/// OpenAI-compatible chat completion over HTTP(S). `endpoint` is the API base
/// (".../v1"); "/chat/completions" is appended unless already present.
class HttpLlmTransport : public dsl::LlmTransport {
public:
    std::string complete(const dsl::LlmClientConfig& config, const nlohmann::json& request) override;
};

}  // namespace lab::service
