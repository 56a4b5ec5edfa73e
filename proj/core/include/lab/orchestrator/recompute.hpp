#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lab/indicators.hpp"
#include "lab/orchestrator/payload.hpp"
#include "lab/registry.hpp"

namespace lab {

struct MetricCell {
    std::string run_id;
    std::string metric;
    double value = 0.0;
    std::string flag;  // empty when the value is valid
};

struct MetricTable {
    std::vector<MetricCell> cells;  // payload-major, metric-minor

    const MetricCell* find(std::string_view run_id, std::string_view metric) const;
};

nlohmann::json to_json(const MetricTable& table);

/// Evaluates each metric on each payload's stored nondominated front. Reference
/// fronts come from the registry. Per-cell problems (no reference front, hv
/// without ref_point, unknown problem) yield NaN with a flag; the payloads are
/// never modified.
MetricTable recompute_metrics(std::span<const RunPayload> payloads, std::span<const MetricSpec> metrics,
                              const ProblemRegistry& registry);

}  // namespace lab
