#pragma once

#include <cstdint>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "lab/algorithms/config.hpp"
#include "lab/indicators.hpp"
#include "lab/orchestrator/events.hpp"
#include "lab/orchestrator/payload.hpp"
#include "lab/problem.hpp"

namespace lab {

struct RunOptions {
    std::string run_id;  // generated when empty
    nlohmann::json problem_overrides = nlohmann::json::object();
    std::string backend = kDefaultBackend;
};

/// Runs one algorithm on one problem until the FE budget is spent. After the
/// initial population and after every generation each metric is evaluated on
/// the current nondominated front and appended to its history.
///
/// Invalid configuration (bad operator settings, zero budget, hv without a
/// ref_point) throws ConfigurationError before anything runs. Failures during
/// the run (evaluator exceptions, non-finite outputs) are captured: the payload
/// comes back with status "failed", the error text and the log, and a `failed`
/// event is emitted.
RunPayload run_single(const ProblemInstance& problem, const AlgorithmConfig& config, std::uint64_t seed,
                      std::size_t fe_budget, std::span<const MetricSpec> metrics, const EventSink& sink = {},
                      const RunOptions& options = {});

}  // namespace lab
