#include "lab/orchestrator/events.hpp"

namespace lab {

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::started: return "started";
        case EventKind::generation: return "generation";
        case EventKind::metric_point: return "metric_point";
        case EventKind::finished: return "finished";
        case EventKind::failed: return "failed";
    }
    return "unknown";
}

nlohmann::json to_json(const ProgressEvent& event) {
    return {{"run_id", event.run_id},
            {"kind", std::string(to_string(event.kind))},
            {"fe_used", event.fe_used},
            {"payload", event.fragment}};
}

}  // namespace lab
