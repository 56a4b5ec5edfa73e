#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lab/algorithms/config.hpp"
#include "lab/indicators.hpp"
#include "lab/orchestrator/events.hpp"
#include "lab/orchestrator/payload.hpp"
#include "lab/registry.hpp"

namespace lab {

enum class SeedPolicy { random, fixed, sequence };

std::string_view to_string(SeedPolicy policy);
SeedPolicy seed_policy_from_string(std::string_view text);

struct SeedPlan {
    SeedPolicy policy = SeedPolicy::sequence;
    std::optional<std::uint64_t> base_seed;
    std::vector<std::uint64_t> realized;

    friend bool operator==(const SeedPlan&, const SeedPlan&) = default;
};

/// `random` draws from the system entropy source once; the drawn seeds are
/// stored in `realized` and reused verbatim on replay.
SeedPlan plan_seeds(SeedPolicy policy, std::optional<std::uint64_t> base_seed, std::size_t n_runs);

nlohmann::json to_json(const SeedPlan& plan);
/// A present `realized` list is taken as-is (length must equal n_runs);
/// otherwise the seeds are planned now.
SeedPlan seed_plan_from_json(const nlohmann::json& j, std::size_t n_runs);

struct ProblemVariant {
    std::optional<std::size_t> n_obj;
    std::optional<std::size_t> n_var;
    std::optional<std::size_t> pop_size;

    friend bool operator==(const ProblemVariant&, const ProblemVariant&) = default;
};

struct ProblemSelection {
    std::string problem_id;
    std::vector<ProblemVariant> variants;  // empty means one default variant

    friend bool operator==(const ProblemSelection&, const ProblemSelection&) = default;
};

struct ExperimentPlan {
    std::string experiment_id;
    std::vector<AlgorithmConfig> algorithms;
    std::vector<ProblemSelection> problems;
    std::size_t n_runs = 1;
    std::size_t fe_budget = 0;
    SeedPlan seed_plan;
    std::size_t max_workers = 1;
    std::vector<MetricSpec> metrics;

    std::size_t total_runs() const;

    friend bool operator==(const ExperimentPlan&, const ExperimentPlan&) = default;
};

nlohmann::json to_json(const ExperimentPlan& plan);
/// Missing experiment_id gets a fresh UUID; missing seed_plan means sequence from 0.
ExperimentPlan experiment_plan_from_json(const nlohmann::json& j);

/// One entry of the deterministic run list.
struct PlannedRun {
    std::size_t index = 0;
    std::size_t algorithm_index = 0;
    std::string problem_id;
    ProblemVariant variant;
    std::size_t run_index = 0;
    std::uint64_t seed = 0;
    AlgorithmConfig config;  // pop_size override applied
};

/// Ordered by algorithm, then problem, then variant, then run index. The seed
/// of a run depends only on its run index.
std::vector<PlannedRun> expand_plan(const ExperimentPlan& plan);

/// Checks counts, budget, seeds, and that every variant resolves against the
/// registry with a valid algorithm configuration. Throws ConfigurationError.
void validate_plan(const ExperimentPlan& plan, const ProblemRegistry& registry);

struct FailureRecord {
    std::size_t run_index = 0;  // position in expand_plan order
    std::string run_id;
    std::string algorithm;
    std::string problem_id;
    std::size_t n_obj = 0;
    std::size_t n_var = 0;
    std::uint64_t seed = 0;
    std::string error;
};

nlohmann::json to_json(const FailureRecord& failure);

struct ExperimentResult {
    ExperimentPlan plan;
    std::vector<RunPayload> payloads;         // completed runs, in plan order
    std::vector<RunPayload> failed_payloads;  // runs that failed inside run_single
    std::vector<FailureRecord> failures;      // every failed run, with or without a payload
    std::vector<std::filesystem::path> payload_paths;
    std::optional<std::filesystem::path> manifest_path;
};

/// Runs every planned run on at most max_workers threads. A failing run
/// becomes a FailureRecord and the campaign continues. With a store directory
/// every payload (failed ones included) is written to `<run_id>.run.json` and a
/// manifest `<experiment_id>.exp.json` lists them with the plan.
ExperimentResult run_experiment(const ExperimentPlan& plan, const ProblemRegistry& registry,
                                const EventSink& sink = {},
                                const std::optional<std::filesystem::path>& store_dir = std::nullopt);

inline constexpr const char* kManifestExtension = ".exp.json";

struct ExperimentManifest {
    ExperimentPlan plan;
    std::vector<std::filesystem::path> payload_paths;
    std::vector<FailureRecord> failures;
};

ExperimentManifest load_manifest(const std::filesystem::path& path);

}  // namespace lab
