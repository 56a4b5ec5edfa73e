#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lab/algorithms/config.hpp"
#include "lab/indicators.hpp"
#include "lab/matrix.hpp"

namespace lab {

inline constexpr int kPayloadSchemaVersion = 1;
inline constexpr const char* kDefaultBackend = "cpu-batch";
inline constexpr const char* kPayloadExtension = ".run.json";

struct ProblemRef {
    std::string id;
    std::size_t n_obj = 0;
    std::size_t n_var = 0;
    nlohmann::json overrides = nlohmann::json::object();

    friend bool operator==(const ProblemRef&, const ProblemRef&) = default;
};

struct MetricPoint {
    std::size_t fe = 0;
    double value = 0.0;

    friend bool operator==(const MetricPoint&, const MetricPoint&) = default;
};

struct MetricHistory {
    std::string metric_id;
    std::vector<MetricPoint> points;

    friend bool operator==(const MetricHistory&, const MetricHistory&) = default;
};

/// One finished (or failed) optimization run: everything needed to replay it
/// and everything it produced.
struct RunPayload {
    int schema_version = kPayloadSchemaVersion;
    std::string run_id;
    std::string status = "completed";  // "completed" | "failed"
    std::string error;
    ProblemRef problem;
    AlgorithmConfig algorithm;
    std::uint64_t seed = 0;
    std::string backend = kDefaultBackend;
    std::size_t fe_budget = 0;
    std::size_t fe_used = 0;
    std::size_t generations = 0;
    std::vector<MetricSpec> metrics;
    std::vector<MetricHistory> metric_histories;
    Matrix final_X;
    Matrix final_F;
    Matrix final_G;
    Matrix final_H;
    std::vector<std::size_t> nondominated_indices;
    std::int64_t wall_time_ms = 0;
    std::vector<std::string> log;
    std::map<std::string, std::string> meta;

    bool completed() const noexcept { return status == "completed"; }
    /// Objective rows of the stored nondominated front.
    Matrix nondominated_front() const { return final_F.select_rows(nondominated_indices); }
    const MetricHistory* history(std::string_view metric_id) const;

    friend bool operator==(const RunPayload&, const RunPayload&) = default;
};

nlohmann::json to_json(const RunPayload& payload);

/// Validates schema_version and the payload invariants; throws LoadError naming the field.
RunPayload payload_from_json(const nlohmann::json& j);

/// Canonical JSON of the payload minus the fields that legitimately differ
/// between replays (run_id, wall_time_ms, log).
std::string replay_fingerprint(const RunPayload& payload);

void persist(const RunPayload& payload, const std::filesystem::path& path);
RunPayload load(const std::filesystem::path& path);

/// Writes `text` to `path` via a temporary file in the same directory.
void write_file_atomically(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

}  // namespace lab
