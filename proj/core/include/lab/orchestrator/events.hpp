#pragma once

#include <cstddef>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace lab {

enum class EventKind { started, generation, metric_point, finished, failed };

std::string_view to_string(EventKind kind);

/// Progress notification. `fragment` holds the front snapshot (generation),
/// the metric point (metric_point) or the summary/error (terminal events).
struct ProgressEvent {
    std::string run_id;
    EventKind kind = EventKind::started;
    std::size_t fe_used = 0;
    nlohmann::json fragment = nlohmann::json::object();

    bool terminal() const noexcept { return kind == EventKind::finished || kind == EventKind::failed; }
};

nlohmann::json to_json(const ProgressEvent& event);

/// Sinks may be called from several workers at once; each run emits from a
/// single thread so per-run order is preserved.
using EventSink = std::function<void(const ProgressEvent&)>;

/// Thread-safe sink that keeps everything it receives.
class EventRecorder {
public:
    void operator()(const ProgressEvent& event) {
        std::lock_guard lock(mutex_);
        events_.push_back(event);
    }

    EventSink sink() {
        return [this](const ProgressEvent& e) { (*this)(e); };
    }

    std::vector<ProgressEvent> events() const {
        std::lock_guard lock(mutex_);
        return events_;
    }

    std::vector<ProgressEvent> events_for(std::string_view run_id) const {
        std::lock_guard lock(mutex_);
        std::vector<ProgressEvent> out;
        for (const auto& e : events_) {
            if (e.run_id == run_id) out.push_back(e);
        }
        return out;
    }

private:
    mutable std::mutex mutex_;
    std::vector<ProgressEvent> events_;
};

}  // namespace lab
