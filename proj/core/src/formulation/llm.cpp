#include "lab/formulation/llm.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace lab::dsl {

using nlohmann::json;

namespace {

std::string env_or(const char* name, std::string fallback = {}) {
    const char* v = std::getenv(name);
    return v != nullptr ? std::string(v) : fallback;
}

}  // namespace

LlmClientConfig LlmClientConfig::from_environment() {
    LlmClientConfig c;
    c.endpoint = env_or("LAB_LLM_ENDPOINT");
    c.model = env_or("LAB_LLM_MODEL", "gpt-4o-mini");
    c.api_key = env_or("LAB_LLM_API_KEY");
    if (const auto t = env_or("LAB_LLM_TIMEOUT_S"); !t.empty()) {
        try {
            c.timeout = std::chrono::seconds(std::stol(t));
        } catch (const std::exception&) {
            throw ConfigurationError("LAB_LLM_TIMEOUT_S must be an integer number of seconds", "LAB_LLM_TIMEOUT_S");
        }
    }
    return c;
}

std::unique_ptr<FixtureTransport> FixtureTransport::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigurationError(fmt::format("cannot read LLM fixture '{}'", path), "LAB_LLM_FIXTURE");
    std::ostringstream text;
    text << in.rdbuf();
    return std::make_unique<FixtureTransport>(text.str());
}

const std::string& system_prompt() {
    static const std::string prompt = R"PROMPT(You translate optimization problem descriptions into a JSON problem document.
Reply with exactly one fenced ```json block and nothing else.

Document fields:
  name             identifier without '@'
  n_var, n_obj     positive integers
  n_ieq, n_eq      non-negative integers (constraint counts)
  lower, upper     number (applied to every variable) or list of n_var numbers
  objectives       list of n_obj expressions, all minimized
  constraints_ieq  list of n_ieq expressions, feasible when <= 0
  constraints_eq   list of n_eq expressions, feasible when == 0

Expression grammar:
  expr   := term (('+' | '-') term)*
  term   := unary (('*' | '/') unary)*
  unary  := ('-' | '+') unary | power
  power  := atom ('^' unary)?
  atom   := number | 'pi' | 'e' | x '[' index ']' | func '(' expr ')'
          | 'sum' '(' name '=' int '..' int ',' expr ')' | name | '(' expr ')'
  index  := int | name | name ('+' | '-') int
  func   := sqrt | sin | cos | exp | abs | log
Variables are 1-based: x[1] .. x[n_var]. Inside sum the index name is usable
as a number. Sum bounds are integer literals.

Example (two objectives, 30 variables):
```json
{"name": "zdt1_custom", "n_var": 30, "n_obj": 2, "n_ieq": 0, "n_eq": 0,
 "lower": 0, "upper": 1,
 "objectives": ["x[1]",
   "(1 + 9*sum(i=2..30, x[i])/29)*(1 - sqrt(x[1]/(1 + 9*sum(i=2..30, x[i])/29)))"],
 "constraints_ieq": [], "constraints_eq": []}
```

Example (constrained):
```json
{"name": "bnh", "n_var": 2, "n_obj": 2, "n_ieq": 2, "n_eq": 0,
 "lower": [0, 0], "upper": [5, 3],
 "objectives": ["4*x[1]^2 + 4*x[2]^2", "(x[1] - 5)^2 + (x[2] - 5)^2"],
 "constraints_ieq": ["(x[1] - 5)^2 + x[2]^2 - 25", "7.7 - (x[1] - 8)^2 - (x[2] + 3)^2"],
 "constraints_eq": []}
```)PROMPT";
    return prompt;
}

json build_chat_request(const LlmClientConfig& config, const std::string& prompt) {
    return {{"model", config.model},
            {"temperature", 0},
            {"messages",
             json::array({{{"role", "system"}, {"content", system_prompt()}}, {{"role", "user"}, {"content", prompt}}})}};
}

namespace {

std::string response_content(const std::string& body) {
    const json envelope = json::parse(body, nullptr, false);
    if (envelope.is_discarded() || !envelope.is_object()) return body;
    if (envelope.contains("choices") && envelope.at("choices").is_array() && !envelope.at("choices").empty()) {
        const auto& choice = envelope.at("choices")[0];
        if (choice.contains("message") && choice.at("message").contains("content") &&
            choice.at("message").at("content").is_string()) {
            return choice.at("message").at("content").get<std::string>();
        }
        throw ExtractionError("response has no message content", body);
    }
    return body;
}

std::optional<json> fenced_block(const std::string& content) {
    for (std::size_t pos = content.find("```"); pos != std::string::npos; pos = content.find("```", pos + 3)) {
        std::size_t start = content.find('\n', pos);
        if (start == std::string::npos) break;
        const std::size_t end = content.find("```", start);
        if (end == std::string::npos) break;
        json doc = json::parse(content.substr(start + 1, end - start - 1), nullptr, false);
        if (!doc.is_discarded() && doc.is_object()) return doc;
        pos = end;
    }
    return std::nullopt;
}

std::optional<json> first_object(const std::string& content) {
    for (std::size_t open = content.find('{'); open != std::string::npos; open = content.find('{', open + 1)) {
        int depth = 0;
        bool in_string = false;
        for (std::size_t i = open; i < content.size(); ++i) {
            const char c = content[i];
            if (in_string) {
                if (c == '\\') {
                    ++i;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}' && --depth == 0) {
                json doc = json::parse(content.substr(open, i - open + 1), nullptr, false);
                if (!doc.is_discarded() && doc.is_object()) return doc;
                break;
            }
        }
    }
    return std::nullopt;
}

}  // namespace

ProblemSource extract_problem_source(const std::string& response_body) {
    const std::string content = response_content(response_body);
    std::optional<json> doc = fenced_block(content);
    if (!doc) doc = first_object(content);
    if (!doc || !doc->contains("objectives")) {
        throw ExtractionError("response does not contain a problem document", response_body);
    }
    try {
        return problem_source_from_json(*doc);
    } catch (const ConfigurationError& e) {
        throw ExtractionError(fmt::format("problem document is malformed: {}", e.what()), response_body);
    }
}

ProblemSource llm_generate(const std::string& prompt, const LlmClientConfig& config, LlmTransport& transport) {
    if (transport.requires_credentials()) {
        if (config.endpoint.empty()) throw ConfigurationError("LLM endpoint is not configured", "LAB_LLM_ENDPOINT");
        if (config.api_key.empty()) throw ConfigurationError("LLM credential is not configured", "LAB_LLM_API_KEY");
    }
    const std::string body = transport.complete(config, build_chat_request(config, prompt));
    ProblemSource source = extract_problem_source(body);
    source.provenance = Provenance::llm;
    source.raw_prompt = prompt;
    return source;
}

}  // namespace lab::dsl
