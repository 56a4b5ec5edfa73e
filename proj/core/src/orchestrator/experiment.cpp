#include "lab/orchestrator/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "lab/algorithms/engine.hpp"
#include "lab/errors.hpp"
#include "lab/json_util.hpp"
#include "lab/orchestrator/runner.hpp"

namespace lab {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(SeedPolicy policy) {
    switch (policy) {
        case SeedPolicy::random: return "random";
        case SeedPolicy::fixed: return "fixed";
        case SeedPolicy::sequence: return "sequence";
    }
    return "unknown";
}

SeedPolicy seed_policy_from_string(std::string_view text) {
    if (text == "random") return SeedPolicy::random;
    if (text == "fixed") return SeedPolicy::fixed;
    if (text == "sequence") return SeedPolicy::sequence;
    throw ConfigurationError(fmt::format("unknown seed policy '{}'", text), "seed_plan.policy");
}

SeedPlan plan_seeds(SeedPolicy policy, std::optional<std::uint64_t> base_seed, std::size_t n_runs) {
    SeedPlan plan{policy, base_seed, {}};
    plan.realized.reserve(n_runs);
    switch (policy) {
        case SeedPolicy::fixed:
            if (!base_seed) throw ConfigurationError("fixed seed policy requires base_seed", "seed_plan.base_seed");
            plan.realized.assign(n_runs, *base_seed);
            break;
        case SeedPolicy::sequence:
            if (!base_seed) throw ConfigurationError("sequence seed policy requires base_seed", "seed_plan.base_seed");
            for (std::size_t i = 0; i < n_runs; ++i) plan.realized.push_back(*base_seed + i);
            break;
        case SeedPolicy::random: {
            std::random_device entropy;
            for (std::size_t i = 0; i < n_runs; ++i) {
                plan.realized.push_back((static_cast<std::uint64_t>(entropy()) << 32) ^ entropy());
            }
            break;
        }
    }
    return plan;
}

json to_json(const SeedPlan& plan) {
    json j = {{"policy", std::string(to_string(plan.policy))}, {"realized", plan.realized}};
    j["base_seed"] = plan.base_seed ? json(*plan.base_seed) : json(nullptr);
    return j;
}

SeedPlan seed_plan_from_json(const json& j, std::size_t n_runs) {
    if (!j.is_object()) throw ConfigurationError("seed_plan must be an object", "seed_plan");
    const SeedPolicy policy = seed_policy_from_string(j.value("policy", std::string("sequence")));
    std::optional<std::uint64_t> base;
    if (j.contains("base_seed") && !j.at("base_seed").is_null()) {
        if (!j.at("base_seed").is_number_unsigned() && !j.at("base_seed").is_number_integer()) {
            throw ConfigurationError("base_seed must be a non-negative integer", "seed_plan.base_seed");
        }
        base = j.at("base_seed").get<std::uint64_t>();
    }
    if (j.contains("realized") && !j.at("realized").empty()) {
        SeedPlan plan{policy, base, j.at("realized").get<std::vector<std::uint64_t>>()};
        if (plan.realized.size() != n_runs) {
            throw ConfigurationError(
                fmt::format("seed_plan.realized has {} seeds for {} runs", plan.realized.size(), n_runs),
                "seed_plan.realized");
        }
        return plan;
    }
    return plan_seeds(policy, base, n_runs);
}

std::size_t ExperimentPlan::total_runs() const {
    std::size_t variants = 0;
    for (const auto& p : problems) variants += std::max<std::size_t>(1, p.variants.size());
    return algorithms.size() * variants * n_runs;
}

namespace {

json optional_size(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

std::optional<std::size_t> read_optional_size(const json& j, const char* key, const std::string& field) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() <= 0) {
        throw ConfigurationError(fmt::format("{} must be a positive integer", field), field);
    }
    return v.get<std::size_t>();
}

std::size_t read_positive(const json& j, const char* key, std::optional<std::size_t> fallback = std::nullopt) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        throw ConfigurationError(fmt::format("missing required field '{}'", key), key);
    }
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() <= 0) {
        throw ConfigurationError(fmt::format("{} must be a positive integer", key), key);
    }
    return v.get<std::size_t>();
}

std::vector<ProblemVariant> variants_of(const ProblemSelection& p) {
    return p.variants.empty() ? std::vector<ProblemVariant>{ProblemVariant{}} : p.variants;
}

json variant_overrides(const ProblemVariant& v) {
    json o = json::object();
    if (v.n_obj) o["n_obj"] = *v.n_obj;
    if (v.n_var) o["n_var"] = *v.n_var;
    if (v.pop_size) o["pop_size"] = *v.pop_size;
    return o;
}

}  // namespace

json to_json(const ExperimentPlan& plan) {
    json algorithms = json::array();
    for (const auto& a : plan.algorithms) algorithms.push_back(to_json(a));
    json problems = json::array();
    for (const auto& p : plan.problems) {
        json variants = json::array();
        for (const auto& v : p.variants) {
            variants.push_back({{"n_obj", optional_size(v.n_obj)},
                                {"n_var", optional_size(v.n_var)},
                                {"pop_size", optional_size(v.pop_size)}});
        }
        problems.push_back({{"problem_id", p.problem_id}, {"variants", variants}});
    }
    json metrics = json::array();
    for (const auto& m : plan.metrics) metrics.push_back(to_json(m));
    return {{"experiment_id", plan.experiment_id}, {"algorithms", algorithms},  {"problems", problems},
            {"n_runs", plan.n_runs},               {"fe_budget", plan.fe_budget}, {"seed_plan", to_json(plan.seed_plan)},
            {"max_workers", plan.max_workers},     {"metrics", metrics}};
}

ExperimentPlan experiment_plan_from_json(const json& j) {
    if (!j.is_object()) throw ConfigurationError("experiment plan must be an object", "plan");
    ExperimentPlan plan;
    plan.experiment_id = j.contains("experiment_id") && j.at("experiment_id").is_string()
                             ? j.at("experiment_id").get<std::string>()
                             : make_uuid();
    if (!j.contains("algorithms") || !j.at("algorithms").is_array() || j.at("algorithms").empty()) {
        throw ConfigurationError("algorithms must be a nonempty list", "algorithms");
    }
    for (const auto& a : j.at("algorithms")) {
        plan.algorithms.push_back(a.is_string() ? AlgorithmConfig::defaults(algorithm_id_from_string(a.get<std::string>()))
                                                : algorithm_config_from_json(a));
    }
    if (!j.contains("problems") || !j.at("problems").is_array() || j.at("problems").empty()) {
        throw ConfigurationError("problems must be a nonempty list", "problems");
    }
    for (std::size_t i = 0; i < j.at("problems").size(); ++i) {
        const auto& p = j.at("problems")[i];
        ProblemSelection sel;
        if (p.is_string()) {
            sel.problem_id = p.get<std::string>();
        } else {
            const std::string field = fmt::format("problems[{}]", i);
            if (!p.is_object() || !p.contains("problem_id") || !p.at("problem_id").is_string()) {
                throw ConfigurationError("problem entry needs a problem_id", field + ".problem_id");
            }
            sel.problem_id = p.at("problem_id").get<std::string>();
            if (p.contains("variants")) {
                for (std::size_t k = 0; k < p.at("variants").size(); ++k) {
                    const auto& v = p.at("variants")[k];
                    const std::string vf = fmt::format("{}.variants[{}]", field, k);
                    // "M"/"D" are accepted as shorthand for n_obj/n_var.
                    ProblemVariant pv;
                    pv.n_obj = read_optional_size(v, v.contains("M") ? "M" : "n_obj", vf + ".n_obj");
                    pv.n_var = read_optional_size(v, v.contains("D") ? "D" : "n_var", vf + ".n_var");
                    pv.pop_size = read_optional_size(v, "pop_size", vf + ".pop_size");
                    sel.variants.push_back(pv);
                }
            }
        }
        plan.problems.push_back(std::move(sel));
    }
    plan.n_runs = read_positive(j, "n_runs", 1);
    plan.fe_budget = read_positive(j, "fe_budget");
    plan.max_workers = read_positive(j, "max_workers", 1);
    if (j.contains("metrics")) {
        for (const auto& m : j.at("metrics")) plan.metrics.push_back(metric_spec_from_json(m));
    }
    plan.seed_plan = j.contains("seed_plan") ? seed_plan_from_json(j.at("seed_plan"), plan.n_runs)
                                             : plan_seeds(SeedPolicy::sequence, 0, plan.n_runs);
    return plan;
}

std::vector<PlannedRun> expand_plan(const ExperimentPlan& plan) {
    std::vector<PlannedRun> runs;
    runs.reserve(plan.total_runs());
    for (std::size_t a = 0; a < plan.algorithms.size(); ++a) {
        for (const auto& problem : plan.problems) {
            for (const auto& variant : variants_of(problem)) {
                for (std::size_t r = 0; r < plan.n_runs; ++r) {
                    PlannedRun run;
                    run.index = runs.size();
                    run.algorithm_index = a;
                    run.problem_id = problem.problem_id;
                    run.variant = variant;
                    run.run_index = r;
                    run.seed = plan.seed_plan.realized.at(r);
                    run.config = plan.algorithms[a];
                    if (variant.pop_size) run.config.pop_size = *variant.pop_size;
                    runs.push_back(std::move(run));
                }
            }
        }
    }
    return runs;
}

void validate_plan(const ExperimentPlan& plan, const ProblemRegistry& registry) {
    if (plan.algorithms.empty()) throw ConfigurationError("algorithms must be nonempty", "algorithms");
    if (plan.problems.empty()) throw ConfigurationError("problems must be nonempty", "problems");
    if (plan.n_runs == 0) throw ConfigurationError("n_runs must be positive", "n_runs");
    if (plan.fe_budget == 0) throw ConfigurationError("fe_budget must be positive", "fe_budget");
    if (plan.max_workers == 0) throw ConfigurationError("max_workers must be positive", "max_workers");
    if (plan.seed_plan.realized.size() != plan.n_runs) {
        throw ConfigurationError("seed plan must hold one seed per run", "seed_plan.realized");
    }
    for (const auto& a : plan.algorithms) {
        for (const auto& p : plan.problems) {
            for (const auto& v : variants_of(p)) {
                ProblemPtr problem;
                try {
                    problem = registry.resolve(p.problem_id, v.n_obj, v.n_var);
                } catch (const ConfigurationError&) {
                    throw;
                } catch (const Error& e) {
                    throw ConfigurationError(e.what(), "problems");
                }
                AlgorithmConfig cfg = a;
                if (v.pop_size) cfg.pop_size = *v.pop_size;
                resolve_config(cfg, *problem);
                MetricContext ctx;
                ctx.n_obj = problem->n_obj;
                if (problem->reference_front) ctx.reference_front = problem->reference_front->F;
                for (const auto& m : plan.metrics) make_metric(m, ctx);
            }
        }
    }
}

json to_json(const FailureRecord& f) {
    return {{"run_index", f.run_index}, {"run_id", f.run_id}, {"algorithm", f.algorithm},
            {"problem_id", f.problem_id}, {"n_obj", f.n_obj},   {"n_var", f.n_var},
            {"seed", f.seed},           {"error", f.error}};
}

namespace {

FailureRecord failure_from_json(const json& j) {
    FailureRecord f;
    f.run_index = j.at("run_index").get<std::size_t>();
    f.run_id = j.at("run_id").get<std::string>();
    f.algorithm = j.at("algorithm").get<std::string>();
    f.problem_id = j.at("problem_id").get<std::string>();
    f.n_obj = j.at("n_obj").get<std::size_t>();
    f.n_var = j.at("n_var").get<std::size_t>();
    f.seed = j.at("seed").get<std::uint64_t>();
    f.error = j.at("error").get<std::string>();
    return f;
}

struct Slot {
    std::optional<RunPayload> payload;
    std::optional<RunPayload> failed_payload;
    std::optional<FailureRecord> failure;
    std::optional<fs::path> path;
};

}  // namespace

ExperimentResult run_experiment(const ExperimentPlan& plan, const ProblemRegistry& registry, const EventSink& sink,
                                const std::optional<fs::path>& store_dir) {
    validate_plan(plan, registry);
    const auto runs = expand_plan(plan);
    if (store_dir) fs::create_directories(*store_dir);

    std::vector<Slot> slots(runs.size());
    std::atomic<std::size_t> next{0};

    auto execute = [&](const PlannedRun& run, Slot& slot) {
        FailureRecord failure;
        failure.run_index = run.index;
        failure.algorithm = std::string(to_string(run.config.algorithm_id));
        failure.problem_id = run.problem_id;
        failure.seed = run.seed;
        failure.run_id = make_uuid();
        try {
            const ProblemPtr problem = registry.resolve(run.problem_id, run.variant.n_obj, run.variant.n_var);
            failure.n_obj = problem->n_obj;
            failure.n_var = problem->n_var;
            RunOptions options;
            options.run_id = failure.run_id;
            options.problem_overrides = variant_overrides(run.variant);
            RunPayload payload = run_single(*problem, run.config, run.seed, plan.fe_budget, plan.metrics, sink, options);
            payload.meta["experiment_id"] = plan.experiment_id;
            payload.meta["run_index"] = std::to_string(run.run_index);
            if (store_dir) {
                fs::path path = *store_dir / (payload.run_id + kPayloadExtension);
                persist(payload, path);
                slot.path = path;
            }
            if (payload.completed()) {
                slot.payload = std::move(payload);
            } else {
                failure.error = payload.error;
                slot.failure = failure;
                slot.failed_payload = std::move(payload);
            }
        } catch (const std::exception& e) {
            failure.error = e.what();
            slot.failure = failure;
            if (sink) sink(ProgressEvent{failure.run_id, EventKind::failed, 0, {{"error", failure.error}}});
        }
    };

    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < runs.size(); i = next.fetch_add(1)) execute(runs[i], slots[i]);
    };

    const std::size_t n_threads = std::min(plan.max_workers, runs.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }

    ExperimentResult result;
    result.plan = plan;
    for (auto& slot : slots) {
        if (slot.payload) result.payloads.push_back(std::move(*slot.payload));
        if (slot.failed_payload) result.failed_payloads.push_back(std::move(*slot.failed_payload));
        if (slot.failure) result.failures.push_back(std::move(*slot.failure));
        if (slot.path) result.payload_paths.push_back(*slot.path);
    }

    if (store_dir) {
        json paths = json::array();
        for (const auto& p : result.payload_paths) paths.push_back(p.filename().string());
        json failures = json::array();
        for (const auto& f : result.failures) failures.push_back(to_json(f));
        json manifest = {{"schema_version", kPayloadSchemaVersion},
                         {"plan", to_json(plan)},
                         {"payloads", paths},
                         {"failures", failures}};
        fs::path path = *store_dir / (plan.experiment_id + kManifestExtension);
        write_file_atomically(path, canonical_dump(manifest) + "\n");
        result.manifest_path = path;
    }
    return result;
}

ExperimentManifest load_manifest(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw LoadError("manifest", e.what());
    }
    if (!j.contains("schema_version") || j.at("schema_version") != kPayloadSchemaVersion) {
        throw LoadError("schema_version", "unsupported manifest schema_version");
    }
    ExperimentManifest m;
    try {
        m.plan = experiment_plan_from_json(j.at("plan"));
        for (const auto& p : j.at("payloads")) m.payload_paths.push_back(path.parent_path() / p.get<std::string>());
        for (const auto& f : j.at("failures")) m.failures.push_back(failure_from_json(f));
    } catch (const json::exception& e) {
        throw LoadError("manifest", e.what());
    } catch (const ConfigurationError& e) {
        throw LoadError(e.field().empty() ? "plan" : "plan." + e.field(), e.what());
    }
    return m;
}

}  // namespace lab
