#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "lab/formulation/llm.hpp"
#include "lab/formulation/source.hpp"
#include "lab/orchestrator/events.hpp"
#include "lab/orchestrator/experiment.hpp"
#include "lab/orchestrator/payload.hpp"
#include "lab/registry.hpp"

namespace lab::service {

struct ServiceConfig {
    std::filesystem::path store = "lab-store";
    int port = 8080;
    std::string host = "127.0.0.1";
    std::size_t workers = 2;
    dsl::LlmClientConfig llm;
    std::optional<std::filesystem::path> llm_fixture;  // test mode when set

    /// LAB_STORE, LAB_PORT, LAB_HOST, LAB_WORKERS, LAB_LLM_* and LAB_LLM_FIXTURE.
    static ServiceConfig from_environment();
};

struct Request {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

struct Response {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;

    nlohmann::json json() const { return nlohmann::json::parse(body); }
};

/// Error body: {"code", "message", "detail"}.
Response error_response(int status, const std::string& code, const std::string& message,
                        const nlohmann::json& detail = nullptr);

/// Reads events of one run in order. Starts at the most recent generation
/// snapshot so a late subscriber sees the current front, then follows live.
class EventCursor {
public:
    /// Next event, or nullopt when `timeout` passes first or the stream ended.
    std::optional<ProgressEvent> next(std::chrono::milliseconds timeout);
    bool finished() const;

private:
    friend class Service;
    struct Channel;
    EventCursor(std::shared_ptr<Channel> channel, std::size_t position)
        : channel_(std::move(channel)), position_(position) {}

    std::shared_ptr<Channel> channel_;
    std::size_t position_;
};

/// Transport-independent API. Every endpoint is reachable through handle();
/// the HTTP layer only adapts requests and streams events.
class Service {
public:
    explicit Service(ServiceConfig config);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    Response handle(const Request& request);

    /// nullptr for unknown runs.
    std::unique_ptr<EventCursor> subscribe(const std::string& run_id);

    ProblemRegistry& registry() noexcept { return registry_; }
    const ServiceConfig& config() const noexcept { return config_; }

    /// Replaces the LLM transport (default: fixture when configured, else HTTPS).
    void set_llm_transport(std::unique_ptr<dsl::LlmTransport> transport);

    /// Blocks until no submitted job is pending or running.
    void drain();

private:
    struct RunRecord;
    struct ExperimentRecord;

    Response catalog_problems() const;
    Response catalog_algorithms() const;
    Response catalog_metrics() const;
    Response submit_run(const nlohmann::json& body);
    Response get_run(const std::string& id);
    Response submit_experiment(const nlohmann::json& body);
    Response get_experiment(const std::string& id);
    Response experiment_summary(const std::string& id, const Request& request);
    Response experiment_export(const std::string& id, const Request& request);
    Response decide(const nlohmann::json& body);
    Response formulation_generate(const nlohmann::json& body);
    Response formulation_validate(const nlohmann::json& body);
    Response formulation_register(const nlohmann::json& body);

    std::shared_ptr<RunRecord> find_run(const std::string& id);
    std::shared_ptr<RunRecord> ensure_run(const std::string& id);
    void record_event(const ProgressEvent& event);
    void attach_payload(const std::shared_ptr<RunRecord>& record, RunPayload payload, std::filesystem::path path);
    std::shared_ptr<ExperimentRecord> find_experiment(const std::string& id);
    void submit(std::function<void()> job);
    void load_registered_problems();
    void persist_registered_problem(const std::string& id, const dsl::ProblemSource& source);

    ServiceConfig config_;
    ProblemRegistry registry_;
    std::unique_ptr<dsl::LlmTransport> llm_transport_;
    std::mutex llm_mutex_;

    std::mutex state_mutex_;
    std::map<std::string, std::shared_ptr<RunRecord>> runs_;
    std::map<std::string, std::shared_ptr<ExperimentRecord>> experiments_;

    std::mutex queue_mutex_;
    std::condition_variable queue_cv_;
    std::condition_variable idle_cv_;
    std::deque<std::function<void()>> queue_;
    std::size_t active_jobs_ = 0;
    bool stopping_ = false;
    std::vector<std::jthread> workers_;
};

/// `id`, `event`, `data` lines of one server-sent event.
std::string format_sse(const ProgressEvent& event, std::size_t sequence);

}  // namespace lab::service
