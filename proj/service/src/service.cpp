#include "lab/service/service.hpp"

#include <algorithm>
#include <cstdlib>
#include <random>
#include <regex>

#include <fmt/format.h>

#include "lab/algorithms/engine.hpp"
#include "lab/errors.hpp"
#include "lab/formulation/source.hpp"
#include "lab/json_util.hpp"
#include "lab/mcdm.hpp"
#include "lab/orchestrator/runner.hpp"
#include "lab/service/llm_http.hpp"
#include "lab/stats.hpp"

namespace lab::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string env_or(const char* name, std::string fallback = {}) {
    const char* v = std::getenv(name);
    return v != nullptr && *v != '\0' ? std::string(v) : fallback;
}

Response json_response(int status, const json& body) { return {status, "application/json", canonical_dump(body)}; }

Response config_error(const ConfigurationError& e) {
    const bool budget = e.field() == "fe_budget";
    return error_response(422, budget ? "invalid_budget" : "invalid_config", e.what(), {{"field", e.field()}});
}

bool safe_id(const std::string& id) {
    static const std::regex pattern("[A-Za-z0-9_.@-]{1,128}");
    return std::regex_match(id, pattern) && id.find("..") == std::string::npos;
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= path.size()) {
        const std::size_t end = path.find('/', start);
        const std::string part = path.substr(start, end == std::string::npos ? std::string::npos : end - start);
        if (!part.empty()) parts.push_back(part);
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return parts;
}

}  // namespace

ServiceConfig ServiceConfig::from_environment() {
    ServiceConfig c;
    c.store = env_or("LAB_STORE", c.store.string());
    c.host = env_or("LAB_HOST", c.host);
    try {
        c.port = std::stoi(env_or("LAB_PORT", std::to_string(c.port)));
        c.workers = static_cast<std::size_t>(std::stoul(env_or("LAB_WORKERS", std::to_string(c.workers))));
    } catch (const std::exception&) {
        throw ConfigurationError("LAB_PORT and LAB_WORKERS must be integers", "environment");
    }
    if (c.workers == 0) throw ConfigurationError("LAB_WORKERS must be positive", "LAB_WORKERS");
    c.llm = dsl::LlmClientConfig::from_environment();
    if (const auto fixture = env_or("LAB_LLM_FIXTURE"); !fixture.empty()) c.llm_fixture = fixture;
    return c;
}

Response error_response(int status, const std::string& code, const std::string& message, const json& detail) {
    return json_response(status, {{"code", code}, {"message", message}, {"detail", detail}});
}

std::string format_sse(const ProgressEvent& event, std::size_t sequence) {
    return fmt::format("id: {}\nevent: {}\ndata: {}\n\n", sequence, to_string(event.kind), canonical_dump(to_json(event)));
}

struct EventCursor::Channel {
    mutable std::mutex mutex;
    std::condition_variable cv;
    std::vector<ProgressEvent> events;
    std::optional<std::size_t> last_snapshot;
    bool closed = false;

    void push(const ProgressEvent& e) {
        {
            std::lock_guard lock(mutex);
            if (closed) return;
            if (e.kind == EventKind::generation) last_snapshot = events.size();
            events.push_back(e);
            if (e.terminal()) closed = true;
        }
        cv.notify_all();
    }
};

std::optional<ProgressEvent> EventCursor::next(std::chrono::milliseconds timeout) {
    std::unique_lock lock(channel_->mutex);
    channel_->cv.wait_for(lock, timeout, [&] { return position_ < channel_->events.size() || channel_->closed; });
    if (position_ < channel_->events.size()) return channel_->events[position_++];
    return std::nullopt;
}

bool EventCursor::finished() const {
    std::lock_guard lock(channel_->mutex);
    return channel_->closed && position_ >= channel_->events.size();
}

struct Service::RunRecord {
    std::string id;
    std::shared_ptr<EventCursor::Channel> channel = std::make_shared<EventCursor::Channel>();
    std::string status = "queued";  // queued | running | completed | failed
    std::size_t fe_budget = 0;
    std::optional<RunPayload> payload;
    std::optional<fs::path> path;
    std::string error;
};

struct Service::ExperimentRecord {
    ExperimentPlan plan;
    std::string status = "queued";  // queued | running | completed | failed
    std::optional<ExperimentResult> result;
    std::string error;
};

Service::Service(ServiceConfig config) : config_(std::move(config)) {
    fs::create_directories(config_.store);
    if (config_.llm_fixture) {
        llm_transport_ = dsl::FixtureTransport::from_file(config_.llm_fixture->string());
    } else {
        llm_transport_ = std::make_unique<HttpLlmTransport>();
    }
    load_registered_problems();
    for (std::size_t i = 0; i < config_.workers; ++i) {
        workers_.emplace_back([this] {
            for (;;) {
                std::function<void()> job;
                {
                    std::unique_lock lock(queue_mutex_);
                    queue_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
                    if (queue_.empty()) return;
                    job = std::move(queue_.front());
                    queue_.pop_front();
                    ++active_jobs_;
                }
                job();
                {
                    std::lock_guard lock(queue_mutex_);
                    --active_jobs_;
                }
                idle_cv_.notify_all();
            }
        });
    }
}

Service::~Service() {
    {
        std::lock_guard lock(queue_mutex_);
        stopping_ = true;
    }
    queue_cv_.notify_all();
    workers_.clear();
}

void Service::submit(std::function<void()> job) {
    {
        std::lock_guard lock(queue_mutex_);
        queue_.push_back(std::move(job));
    }
    queue_cv_.notify_one();
}

void Service::drain() {
    std::unique_lock lock(queue_mutex_);
    idle_cv_.wait(lock, [&] { return queue_.empty() && active_jobs_ == 0; });
}

void Service::set_llm_transport(std::unique_ptr<dsl::LlmTransport> transport) {
    std::lock_guard lock(llm_mutex_);
    llm_transport_ = std::move(transport);
}

void Service::load_registered_problems() { dsl::load_problem_directory(config_.store / "problems", registry_); }

void Service::persist_registered_problem(const std::string& id, const dsl::ProblemSource& source) {
    dsl::save_problem_source(config_.store / "problems", id, source);
}

std::shared_ptr<Service::RunRecord> Service::ensure_run(const std::string& id) {
    std::lock_guard lock(state_mutex_);
    auto& slot = runs_[id];
    if (!slot) {
        slot = std::make_shared<RunRecord>();
        slot->id = id;
    }
    return slot;
}

std::shared_ptr<Service::RunRecord> Service::find_run(const std::string& id) {
    {
        std::lock_guard lock(state_mutex_);
        if (auto it = runs_.find(id); it != runs_.end()) return it->second;
    }
    if (!safe_id(id)) return nullptr;
    const fs::path path = config_.store / (id + kPayloadExtension);
    if (!fs::exists(path)) return nullptr;
    RunPayload payload;
    try {
        payload = load(path);
    } catch (const std::exception&) {
        return nullptr;
    }
    auto record = ensure_run(id);
    std::lock_guard lock(state_mutex_);
    if (!record->payload) {
        // Stored runs have no live history; replay a snapshot of the final state.
        const Matrix front = payload.nondominated_front();
        record->channel->push({id, EventKind::generation, payload.fe_used,
                               {{"generation", payload.generations}, {"front", matrix_to_json(front)}}});
        json final_metrics = json::object();
        for (const auto& h : payload.metric_histories) {
            if (h.points.empty()) continue;
            final_metrics[h.metric_id] = number_to_json(h.points.back().value);
            record->channel->push({id, EventKind::metric_point, payload.fe_used,
                                   {{"metric", h.metric_id}, {"generation", payload.generations},
                                    {"value", number_to_json(h.points.back().value)}}});
        }
        if (payload.completed()) {
            record->channel->push({id, EventKind::finished, payload.fe_used,
                                   {{"generations", payload.generations}, {"final_metrics", final_metrics},
                                    {"front", matrix_to_json(front)}}});
        } else {
            record->channel->push({id, EventKind::failed, payload.fe_used, {{"error", payload.error}, {"log", payload.log}}});
        }
        record->status = payload.completed() ? "completed" : "failed";
        record->fe_budget = payload.fe_budget;
        record->path = path;
        record->payload = std::move(payload);
    }
    return record;
}

void Service::record_event(const ProgressEvent& event) {
    auto record = ensure_run(event.run_id);
    if (event.kind == EventKind::started) {
        std::lock_guard lock(state_mutex_);
        if (record->status == "queued") record->status = "running";
    }
    record->channel->push(event);
}

void Service::attach_payload(const std::shared_ptr<RunRecord>& record, RunPayload payload, fs::path path) {
    std::lock_guard lock(state_mutex_);
    record->status = payload.completed() ? "completed" : "failed";
    record->error = payload.error;
    record->fe_budget = payload.fe_budget;
    record->payload = std::move(payload);
    record->path = std::move(path);
}

std::shared_ptr<Service::ExperimentRecord> Service::find_experiment(const std::string& id) {
    {
        std::lock_guard lock(state_mutex_);
        if (auto it = experiments_.find(id); it != experiments_.end()) return it->second;
    }
    if (!safe_id(id)) return nullptr;
    const fs::path path = config_.store / (id + kManifestExtension);
    if (!fs::exists(path)) return nullptr;
    try {
        const auto manifest = load_manifest(path);
        auto record = std::make_shared<ExperimentRecord>();
        record->plan = manifest.plan;
        ExperimentResult result;
        result.plan = manifest.plan;
        result.failures = manifest.failures;
        result.manifest_path = path;
        for (const auto& p : manifest.payload_paths) {
            RunPayload payload = load(p);
            (payload.completed() ? result.payloads : result.failed_payloads).push_back(std::move(payload));
            result.payload_paths.push_back(p);
        }
        record->result = std::move(result);
        record->status = "completed";
        std::lock_guard lock(state_mutex_);
        return experiments_.emplace(id, record).first->second;
    } catch (const std::exception&) {
        return nullptr;
    }
}

Response Service::handle(const Request& request) {
    try {
        const auto parts = split_path(request.path);
        const bool get = request.method == "GET";
        const bool post = request.method == "POST";
        auto body = [&]() -> json {
            if (request.body.empty()) return json::object();
            json j = json::parse(request.body, nullptr, false);
            if (j.is_discarded()) throw InputError("request body is not valid JSON");
            return j;
        };
        auto not_allowed = [&] {
            return error_response(405, "method_not_allowed", fmt::format("{} is not allowed on {}", request.method, request.path));
        };

        if (parts.empty() || parts[0] != "api") {
            return error_response(404, "not_found", fmt::format("no resource at '{}'", request.path));
        }
        const std::size_t n = parts.size();
        if (n == 2 && parts[1] == "health") return get ? json_response(200, {{"status", "ok"}}) : not_allowed();
        if (n == 2 && parts[1] == "problems") return get ? catalog_problems() : not_allowed();
        if (n == 2 && parts[1] == "algorithms") return get ? catalog_algorithms() : not_allowed();
        if (n == 2 && parts[1] == "metrics") return get ? catalog_metrics() : not_allowed();
        if (n >= 2 && parts[1] == "runs") {
            if (n == 2) {
                if (post) return submit_run(body());
                if (!get) return not_allowed();
                json list = json::array();
                std::lock_guard lock(state_mutex_);
                for (const auto& [id, r] : runs_) list.push_back({{"run_id", id}, {"status", r->status}});
                return json_response(200, {{"runs", list}});
            }
            if (n == 3) return get ? get_run(parts[2]) : not_allowed();
            if (n == 4 && parts[3] == "events") {
                if (!get) return not_allowed();
                auto cursor = subscribe(parts[2]);
                if (!cursor) return error_response(404, "not_found", fmt::format("unknown run '{}'", parts[2]));
                std::string text;
                std::size_t seq = 0;
                while (auto e = cursor->next(std::chrono::milliseconds(0))) text += format_sse(*e, seq++);
                return {200, "text/event-stream", text};
            }
        }
        if (n >= 2 && parts[1] == "experiments") {
            if (n == 2) {
                if (post) return submit_experiment(body());
                if (!get) return not_allowed();
                json list = json::array();
                std::lock_guard lock(state_mutex_);
                for (const auto& [id, r] : experiments_) list.push_back({{"experiment_id", id}, {"status", r->status}});
                return json_response(200, {{"experiments", list}});
            }
            if (n == 3) return get ? get_experiment(parts[2]) : not_allowed();
            if (n == 4 && parts[3] == "summary") return get ? experiment_summary(parts[2], request) : not_allowed();
            if (n == 4 && parts[3] == "export") return get ? experiment_export(parts[2], request) : not_allowed();
        }
        if (n == 3 && parts[1] == "mcdm" && parts[2] == "decide") return post ? decide(body()) : not_allowed();
        if (n == 3 && parts[1] == "formulation") {
            if (parts[2] == "generate") return post ? formulation_generate(body()) : not_allowed();
            if (parts[2] == "validate") return post ? formulation_validate(body()) : not_allowed();
            if (parts[2] == "register") return post ? formulation_register(body()) : not_allowed();
        }
        return error_response(404, "not_found", fmt::format("no resource at '{}'", request.path));
    } catch (const InputError& e) {
        return error_response(400, "invalid_request", e.what());
    } catch (const ConfigurationError& e) {
        return config_error(e);
    } catch (const std::exception& e) {
        return error_response(500, "internal_error", e.what());
    }
}

std::unique_ptr<EventCursor> Service::subscribe(const std::string& run_id) {
    auto record = find_run(run_id);
    if (!record) return nullptr;
    std::lock_guard lock(record->channel->mutex);
    const std::size_t start = record->channel->last_snapshot.value_or(0);
    return std::unique_ptr<EventCursor>(new EventCursor(record->channel, start));
}

Response Service::catalog_problems() const {
    json list = json::array();
    for (const auto& e : registry_.catalog()) {
        list.push_back({{"id", e.id},
                        {"name", e.name},
                        {"tags", e.tags},
                        {"default_n_obj", e.default_n_obj},
                        {"default_n_var", e.default_n_var},
                        {"scalable_objectives", e.scalable_objectives},
                        {"kind", e.kind}});
    }
    return json_response(200, {{"problems", list}});
}

Response Service::catalog_algorithms() const {
    json list = json::array();
    for (const auto& e : algorithm_catalog()) {
        list.push_back({{"id", e.id}, {"name", e.name}, {"tags", e.tags}, {"defaults", to_json(e.defaults)}});
    }
    return json_response(200, {{"algorithms", list}});
}

Response Service::catalog_metrics() const {
    json list = json::array();
    for (const auto& e : metric_catalog()) {
        list.push_back({{"id", e.id},
                        {"direction", std::string(to_string(e.direction))},
                        {"requires_reference_front", e.requires_reference_front},
                        {"parameters", e.parameters}});
    }
    return json_response(200, {{"metrics", list}});
}

namespace {

struct RunRequest {
    ProblemPtr problem;
    json overrides = json::object();
    AlgorithmConfig config;
    std::uint64_t seed = 0;
    std::size_t fe_budget = 0;
    std::vector<MetricSpec> metrics;
};

std::optional<std::size_t> optional_dim(const json& j, const char* a, const char* b) {
    for (const char* key : {a, b}) {
        if (j.contains(key) && !j.at(key).is_null()) {
            if (!j.at(key).is_number_integer() || j.at(key).get<long long>() <= 0) {
                throw ConfigurationError(fmt::format("problem.{} must be a positive integer", key), std::string("problem.") + key);
            }
            return j.at(key).get<std::size_t>();
        }
    }
    return std::nullopt;
}

}  // namespace

Response Service::submit_run(const json& body) {
    if (!body.is_object()) return error_response(400, "invalid_request", "run request must be a JSON object");
    RunRequest req;

    if (!body.contains("fe_budget") || !body.at("fe_budget").is_number_integer() ||
        body.at("fe_budget").get<long long>() <= 0) {
        return error_response(422, "invalid_budget", "fe_budget must be a positive integer", {{"field", "fe_budget"}});
    }
    req.fe_budget = body.at("fe_budget").get<std::size_t>();

    const json problem = body.contains("problem") ? body.at("problem") : json(body.value("problem_id", std::string()));
    std::string problem_id;
    std::optional<std::size_t> m;
    std::optional<std::size_t> d;
    if (problem.is_string()) {
        problem_id = problem.get<std::string>();
    } else if (problem.is_object() && problem.contains("id") && problem.at("id").is_string()) {
        problem_id = problem.at("id").get<std::string>();
        m = optional_dim(problem, "n_obj", "M");
        d = optional_dim(problem, "n_var", "D");
        if (m) req.overrides["n_obj"] = *m;
        if (d) req.overrides["n_var"] = *d;
    }
    if (problem_id.empty()) {
        return error_response(422, "invalid_config", "a problem id is required", {{"field", "problem"}});
    }
    try {
        req.problem = registry_.resolve(problem_id, m, d);
    } catch (const UnsupportedError& e) {
        return error_response(422, "unknown_problem", e.what(), {{"field", "problem"}});
    }

    const json algorithm = body.value("algorithm", json("nsga2"));
    try {
        req.config = algorithm.is_string() ? AlgorithmConfig::defaults(algorithm_id_from_string(algorithm.get<std::string>()))
                                           : algorithm_config_from_json(algorithm);
    } catch (const ConfigurationError& e) {
        return error_response(422, "invalid_config", e.what(), {{"field", "algorithm." + e.field()}});
    }

    if (body.contains("seed") && !body.at("seed").is_null()) {
        if (!body.at("seed").is_number_unsigned()) {
            return error_response(422, "invalid_config", "seed must be a non-negative integer", {{"field", "seed"}});
        }
        req.seed = body.at("seed").get<std::uint64_t>();
    } else {
        std::random_device entropy;
        req.seed = (static_cast<std::uint64_t>(entropy()) << 32) ^ entropy();
    }

    if (body.contains("metrics")) {
        if (!body.at("metrics").is_array()) {
            return error_response(422, "invalid_config", "metrics must be a list", {{"field", "metrics"}});
        }
        for (const auto& spec : body.at("metrics")) {
            try {
                req.metrics.push_back(metric_spec_from_json(spec));
            } catch (const ConfigurationError& e) {
                return error_response(422, "unknown_metric", e.what(), {{"field", "metrics"}});
            }
        }
    }

    try {
        resolve_config(req.config, *req.problem);
        MetricContext context;
        context.n_obj = req.problem->n_obj;
        if (req.problem->reference_front) context.reference_front = req.problem->reference_front->F;
        for (const auto& spec : req.metrics) make_metric(spec, context);
    } catch (const ConfigurationError& e) {
        return error_response(422, "invalid_config", e.what(), {{"field", e.field()}});
    }

    const std::string run_id = make_uuid();
    auto record = ensure_run(run_id);
    record->fe_budget = req.fe_budget;
    submit([this, record, req] {
        RunOptions options;
        options.run_id = record->id;
        options.problem_overrides = req.overrides;
        auto sink = [this](const ProgressEvent& e) { record_event(e); };
        try {
            RunPayload payload = run_single(*req.problem, req.config, req.seed, req.fe_budget, req.metrics, sink, options);
            const fs::path path = config_.store / (record->id + kPayloadExtension);
            persist(payload, path);
            attach_payload(record, std::move(payload), path);
        } catch (const std::exception& e) {
            {
                std::lock_guard lock(state_mutex_);
                record->status = "failed";
                record->error = e.what();
            }
            record->channel->push({record->id, EventKind::failed, 0, {{"error", e.what()}}});
        }
    });
    return json_response(202, {{"run_id", run_id}, {"status", "queued"}, {"seed", req.seed}});
}

Response Service::get_run(const std::string& id) {
    auto record = find_run(id);
    if (!record) return error_response(404, "not_found", fmt::format("unknown run '{}'", id));
    std::lock_guard lock(state_mutex_);
    if (record->payload) return json_response(200, to_json(*record->payload));
    std::size_t fe_used = 0;
    {
        std::lock_guard events_lock(record->channel->mutex);
        if (!record->channel->events.empty()) fe_used = record->channel->events.back().fe_used;
    }
    json status = {{"run_id", id}, {"status", record->status}, {"fe_used", fe_used}, {"fe_budget", record->fe_budget}};
    if (!record->error.empty()) status["error"] = record->error;
    return json_response(200, status);
}

Response Service::submit_experiment(const json& body) {
    ExperimentPlan plan;
    try {
        plan = experiment_plan_from_json(body);
        validate_plan(plan, registry_);
    } catch (const ConfigurationError& e) {
        return config_error(e);
    } catch (const UnsupportedError& e) {
        return error_response(422, "unknown_problem", e.what(), {{"field", "problems"}});
    }
    if (!safe_id(plan.experiment_id)) {
        return error_response(422, "invalid_config", "experiment_id may only contain letters, digits, '_', '-', '.', '@'",
                              {{"field", "experiment_id"}});
    }
    auto record = std::make_shared<ExperimentRecord>();
    record->plan = plan;
    {
        std::lock_guard lock(state_mutex_);
        if (experiments_.count(plan.experiment_id) != 0 ||
            fs::exists(config_.store / (plan.experiment_id + kManifestExtension))) {
            return error_response(409, "already_exists", fmt::format("experiment '{}' already exists", plan.experiment_id));
        }
        experiments_.emplace(plan.experiment_id, record);
    }
    submit([this, record] {
        {
            std::lock_guard lock(state_mutex_);
            record->status = "running";
        }
        try {
            auto sink = [this](const ProgressEvent& e) { record_event(e); };
            ExperimentResult result = run_experiment(record->plan, registry_, sink, config_.store);
            for (std::size_t i = 0; i < result.payload_paths.size(); ++i) {
                const fs::path& path = result.payload_paths[i];
                const std::string run_id = path.filename().string().substr(0, path.filename().string().size() -
                                                                                    std::string(kPayloadExtension).size());
                for (const auto* list : {&result.payloads, &result.failed_payloads}) {
                    for (const auto& p : *list) {
                        if (p.run_id == run_id) attach_payload(ensure_run(run_id), p, path);
                    }
                }
            }
            std::lock_guard lock(state_mutex_);
            record->result = std::move(result);
            record->status = "completed";
        } catch (const std::exception& e) {
            std::lock_guard lock(state_mutex_);
            record->status = "failed";
            record->error = e.what();
        }
    });
    return json_response(202, {{"experiment_id", plan.experiment_id},
                               {"status", "queued"},
                               {"total_runs", plan.total_runs()},
                               {"seed_plan", to_json(plan.seed_plan)}});
}

Response Service::get_experiment(const std::string& id) {
    auto record = find_experiment(id);
    if (!record) return error_response(404, "not_found", fmt::format("unknown experiment '{}'", id));
    std::lock_guard lock(state_mutex_);
    json j = {{"experiment_id", id}, {"status", record->status}, {"plan", to_json(record->plan)},
              {"total_runs", record->plan.total_runs()}};
    if (!record->error.empty()) j["error"] = record->error;
    if (record->result) {
        json runs = json::array();
        for (const auto& p : record->result->payloads) runs.push_back(p.run_id);
        json failures = json::array();
        for (const auto& f : record->result->failures) failures.push_back(to_json(f));
        j["run_ids"] = runs;
        j["failures"] = failures;
        j["completed_runs"] = record->result->payloads.size();
    }
    return json_response(200, j);
}

Response Service::experiment_summary(const std::string& id, const Request& request) {
    auto record = find_experiment(id);
    if (!record) return error_response(404, "not_found", fmt::format("unknown experiment '{}'", id));
    std::vector<RunPayload> payloads;
    std::vector<MetricSpec> metrics;
    {
        std::lock_guard lock(state_mutex_);
        if (!record->result) {
            return error_response(409, "experiment_not_finished", fmt::format("experiment '{}' is {}", id, record->status));
        }
        payloads = record->result->payloads;
        payloads.insert(payloads.end(), record->result->failed_payloads.begin(), record->result->failed_payloads.end());
        metrics = record->plan.metrics;
    }
    std::vector<std::string> available;
    for (const auto& m : metrics) available.push_back(m.name());
    auto it = request.query.find("metric");
    const MetricSpec* chosen = nullptr;
    if (it == request.query.end() || it->second.empty()) {
        if (!metrics.empty()) chosen = &metrics.front();
    } else {
        std::string wanted = it->second;
        try {
            wanted = std::string(to_string(metric_id_from_string(wanted)));
        } catch (const ConfigurationError&) {
        }
        for (const auto& m : metrics) {
            if (m.name() == wanted) chosen = &m;
        }
    }
    if (chosen == nullptr) {
        return error_response(422, "unknown_metric",
                              fmt::format("metric '{}' was not recorded by this experiment",
                                          it == request.query.end() ? std::string() : it->second),
                              {{"available", available}});
    }
    const SummaryTable table = summarize(payloads, *chosen);

    const bool export_request = request.path.size() >= 7 && request.path.compare(request.path.size() - 7, 7, "/export") == 0;
    if (export_request) {
        const auto format = request.query.count("format") != 0 ? request.query.at("format") : std::string("csv");
        if (format == "csv") return {200, "text/csv; charset=utf-8", export_csv(table, request.query.count("full_precision") != 0)};
        if (format == "latex") return {200, "application/x-latex", export_latex(table)};
        return error_response(422, "invalid_format", fmt::format("unknown export format '{}'", format),
                              {{"allowed", {"csv", "latex"}}});
    }

    json tests = json::object();
    const std::size_t rows = table.rows.size();
    const std::size_t cols = table.algorithms.size();
    Matrix means(rows, cols);
    bool complete = rows > 0;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            means(r, c) = table.rows[r].cells[c].mean;
            complete = complete && !table.rows[r].cells[c].missing();
        }
    }
    tests["friedman"] = nullptr;
    if (complete && rows >= 2 && cols >= 2) tests["friedman"] = to_json(friedman(means, table.direction));
    json pairs = json::array();
    if (complete) {
        for (std::size_t a = 0; a < cols; ++a) {
            for (std::size_t b = a + 1; b < cols; ++b) {
                std::vector<double> x(rows);
                std::vector<double> y(rows);
                for (std::size_t r = 0; r < rows; ++r) {
                    x[r] = means(r, a);
                    y[r] = means(r, b);
                }
                json t = to_json(wilcoxon_signed_rank(x, y));
                t["a"] = table.algorithms[a];
                t["b"] = table.algorithms[b];
                pairs.push_back(std::move(t));
            }
        }
    }
    tests["wilcoxon"] = pairs;
    json out = to_json(table);
    out["experiment_id"] = id;
    out["tests"] = tests;
    return json_response(200, out);
}

Response Service::experiment_export(const std::string& id, const Request& request) {
    return experiment_summary(id, request);
}

Response Service::decide(const json& body) {
    if (!body.is_object() || !body.contains("run_id") || !body.at("run_id").is_string()) {
        return error_response(422, "invalid_config", "run_id is required", {{"field", "run_id"}});
    }
    const std::string run_id = body.at("run_id").get<std::string>();
    auto record = find_run(run_id);
    if (!record) return error_response(404, "not_found", fmt::format("unknown run '{}'", run_id));
    std::optional<RunPayload> payload;
    std::optional<fs::path> path;
    std::string status;
    {
        std::lock_guard lock(state_mutex_);
        payload = record->payload;
        path = record->path;
        status = record->status;
    }
    if (!payload) {
        if (status == "failed") return error_response(409, "run_failed", fmt::format("run '{}' failed", run_id));
        return error_response(409, "run_not_finished", fmt::format("run '{}' is {}", run_id, status));
    }
    if (!payload->completed()) return error_response(409, "run_failed", fmt::format("run '{}' failed", run_id));

    DecisionMethod method = DecisionMethod::topsis;
    std::vector<double> weights;
    try {
        if (body.contains("method")) {
            if (!body.at("method").is_string()) throw ConfigurationError("method must be a string", "method");
            method = decision_method_from_string(body.at("method").get<std::string>());
        }
        if (body.contains("weights") && !body.at("weights").is_null()) {
            if (!body.at("weights").is_array()) throw ConfigurationError("weights must be a list of numbers", "weights");
            for (const auto& w : body.at("weights")) {
                if (!w.is_number()) throw ConfigurationError("weights must be a list of numbers", "weights");
                weights.push_back(w.get<double>());
            }
        }
        const DecisionSnapshot snapshot = decide_and_snapshot(*payload, method, weights, path);
        json out = to_json(snapshot);
        out["highlight_index"] = snapshot.selected_index;
        if (path) out["sidecar"] = sidecar_path(*path, run_id).filename().string();
        return json_response(200, out);
    } catch (const ConfigurationError& e) {
        return error_response(422, e.field() == "weights" ? "invalid_weights" : "invalid_config", e.what(),
                              {{"field", e.field()}});
    } catch (const DecisionError& e) {
        return error_response(422, "decision_error", e.what());
    }
}

Response Service::formulation_generate(const json& body) {
    if (!body.is_object() || !body.contains("prompt") || !body.at("prompt").is_string()) {
        return error_response(422, "invalid_config", "prompt is required", {{"field", "prompt"}});
    }
    try {
        dsl::ProblemSource source;
        {
            std::lock_guard lock(llm_mutex_);
            source = dsl::llm_generate(body.at("prompt").get<std::string>(), config_.llm, *llm_transport_);
        }
        const auto outcome = dsl::verify(source);
        return json_response(200, {{"source", dsl::to_json(source)}, {"report", dsl::to_json(outcome.report)}});
    } catch (const ConfigurationError& e) {
        return error_response(422, "llm_not_configured", e.what(), {{"field", e.field()}});
    } catch (const dsl::ExtractionError& e) {
        return error_response(502, "extraction_error", e.what(), {{"raw_response", e.raw_response()}});
    } catch (const dsl::TransportError& e) {
        return error_response(502, "transport_error", e.what());
    }
}

Response Service::formulation_validate(const json& body) {
    const json document = body.is_object() && body.contains("source") ? body.at("source") : body;
    return json_response(200, dsl::to_json(dsl::verify(document).report));
}

Response Service::formulation_register(const json& body) {
    const json document = body.is_object() && body.contains("source") ? body.at("source") : body;
    auto outcome = dsl::verify_and_register(document, registry_);
    if (!outcome.report.problem_id) {
        return error_response(422, "registration_refused", "the problem did not pass verification",
                              {{"report", dsl::to_json(outcome.report)}});
    }
    persist_registered_problem(*outcome.report.problem_id, outcome.parsed->source);
    return json_response(201, {{"problem_id", *outcome.report.problem_id}, {"report", dsl::to_json(outcome.report)}});
}

}  // namespace lab::service
