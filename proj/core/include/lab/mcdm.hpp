#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lab/matrix.hpp"
#include "lab/orchestrator/payload.hpp"

namespace lab {

enum class DecisionMethod { topsis, weighted_sum };

std::string_view to_string(DecisionMethod method);
DecisionMethod decision_method_from_string(std::string_view text);

/// Per-column min-max scaling to [0,1]. Zero-range columns map to 0.
Matrix normalize_front(const Matrix& F);

/// Empty `weights` means uniform. Negative, non-finite or all-zero weights and
/// a length other than F.cols() raise ConfigurationError. The result sums to 1.
std::vector<double> normalize_weights(std::span<const double> weights, std::size_t n_obj);

struct Decision {
    std::size_t index = 0;
    double score = 0.0;
    std::vector<double> scores;  // one per row
};

/// Lowest weighted sum of normalized objectives; ties to the lowest index.
Decision weighted_sum_decide(const Matrix& F, std::span<const double> weights = {});

/// Highest closeness to the all-zero ideal relative to the column-max
/// anti-ideal of the weighted normalized matrix; ties to the lowest index.
/// Closeness is 0 when a row sits on both points.
Decision topsis_decide(const Matrix& F, std::span<const double> weights = {});

Decision decide(const Matrix& F, DecisionMethod method, std::span<const double> weights = {});

/// Hex SHA-256 of the canonical JSON of F.
std::string front_hash(const Matrix& F);

struct DecisionSnapshot {
    std::string run_id;
    DecisionMethod method = DecisionMethod::topsis;
    std::vector<double> weights;           // normalized
    std::vector<double> original_weights;  // as supplied; empty when defaulted
    std::size_t selected_index = 0;        // row of the nondominated front
    std::size_t payload_row = 0;           // row of final_F
    double score = 0.0;
    std::vector<double> normalized_row;
    std::optional<std::vector<double>> objective_values;  // only for M > 3
    std::string created_at;
    std::string front_hash;
    std::map<std::string, std::string> meta;
};

nlohmann::json to_json(const DecisionSnapshot& snapshot);
DecisionSnapshot decision_snapshot_from_json(const nlohmann::json& j);

inline constexpr const char* kDecisionExtension = ".decision.json";

/// Scores the payload's stored nondominated front. Empty front raises
/// DecisionError. When `payload_path` is given the snapshot is written next to
/// it as `<run_id>.decision.json`.
DecisionSnapshot decide_and_snapshot(const RunPayload& payload, DecisionMethod method,
                                     std::span<const double> weights = {},
                                     const std::optional<std::filesystem::path>& payload_path = std::nullopt);

std::filesystem::path sidecar_path(const std::filesystem::path& payload_path, std::string_view run_id);

}  // namespace lab
