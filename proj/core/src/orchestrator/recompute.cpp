#include "lab/orchestrator/recompute.hpp"

#include <limits>

#include "lab/errors.hpp"
#include "lab/json_util.hpp"

namespace lab {

const MetricCell* MetricTable::find(std::string_view run_id, std::string_view metric) const {
    for (const auto& c : cells) {
        if (c.run_id == run_id && c.metric == metric) return &c;
    }
    return nullptr;
}

nlohmann::json to_json(const MetricTable& table) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : table.cells) {
        nlohmann::json cell = {{"run_id", c.run_id}, {"metric", c.metric}, {"value", number_to_json(c.value)}};
        cell["flag"] = c.flag.empty() ? nlohmann::json(nullptr) : nlohmann::json(c.flag);
        cells.push_back(std::move(cell));
    }
    return {{"cells", cells}};
}

MetricTable recompute_metrics(std::span<const RunPayload> payloads, std::span<const MetricSpec> metrics,
                              const ProblemRegistry& registry) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    MetricTable table;
    for (const auto& payload : payloads) {
        const Matrix front = payload.nondominated_front();
        MetricContext context;
        context.n_obj = front.cols();
        std::string resolve_error;
        try {
            auto problem = registry.resolve(payload.problem.id, payload.problem.n_obj, payload.problem.n_var);
            if (problem->reference_front) context.reference_front = problem->reference_front->F;
        } catch (const std::exception& e) {
            resolve_error = e.what();
        }
        for (const auto& spec : metrics) {
            MetricCell cell{payload.run_id, spec.name(), nan, {}};
            try {
                if (spec.requires_reference_front() && !context.reference_front) {
                    cell.flag = resolve_error.empty() ? "missing_reference_front"
                                                      : "missing_reference_front: " + resolve_error;
                } else {
                    cell.value = make_metric(spec, context)(front);
                }
            } catch (const ConfigurationError& e) {
                cell.flag = std::string("configuration_error: ") + e.what();
            }
            table.cells.push_back(std::move(cell));
        }
    }
    return table;
}

}  // namespace lab
