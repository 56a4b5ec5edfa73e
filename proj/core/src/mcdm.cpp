#include "lab/mcdm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "lab/errors.hpp"
#include "lab/json_util.hpp"

namespace lab {

using nlohmann::json;

std::string_view to_string(DecisionMethod method) {
    return method == DecisionMethod::topsis ? "topsis" : "weighted_sum";
}

DecisionMethod decision_method_from_string(std::string_view text) {
    if (text == "topsis") return DecisionMethod::topsis;
    if (text == "weighted_sum") return DecisionMethod::weighted_sum;
    throw ConfigurationError(fmt::format("unknown decision method '{}'", text), "method");
}

Matrix normalize_front(const Matrix& F) {
    Matrix out(F.rows(), F.cols(), 0.0);
    for (std::size_t j = 0; j < F.cols(); ++j) {
        double lo = F(0, j);
        double hi = F(0, j);
        for (std::size_t i = 1; i < F.rows(); ++i) {
            lo = std::min(lo, F(i, j));
            hi = std::max(hi, F(i, j));
        }
        const double range = hi - lo;
        if (!(range > 0.0)) continue;
        for (std::size_t i = 0; i < F.rows(); ++i) out(i, j) = (F(i, j) - lo) / range;
    }
    return out;
}

std::vector<double> normalize_weights(std::span<const double> weights, std::size_t n_obj) {
    if (weights.empty()) return std::vector<double>(n_obj, 1.0 / static_cast<double>(n_obj));
    if (weights.size() != n_obj) {
        throw ConfigurationError(fmt::format("expected {} weights, got {}", n_obj, weights.size()), "weights");
    }
    double total = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0) throw ConfigurationError("weights must be finite and non-negative", "weights");
        total += w;
    }
    if (!(total > 0.0)) throw ConfigurationError("weights must not all be zero", "weights");
    std::vector<double> out(weights.begin(), weights.end());
    for (double& w : out) w /= total;
    return out;
}

namespace {

void require_front(const Matrix& F) {
    if (F.rows() == 0 || F.cols() == 0) throw DecisionError("cannot decide on an empty front");
}

}  // namespace

Decision weighted_sum_decide(const Matrix& F, std::span<const double> weights) {
    require_front(F);
    const auto w = normalize_weights(weights, F.cols());
    const Matrix N = normalize_front(F);
    Decision d;
    d.scores.resize(F.rows());
    for (std::size_t i = 0; i < F.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < F.cols(); ++j) s += w[j] * N(i, j);
        d.scores[i] = s;
        if (i == 0 || s < d.score) {
            d.index = i;
            d.score = s;
        }
    }
    return d;
}

Decision topsis_decide(const Matrix& F, std::span<const double> weights) {
    require_front(F);
    const auto w = normalize_weights(weights, F.cols());
    Matrix V = normalize_front(F);
    std::vector<double> anti(F.cols(), 0.0);
    for (std::size_t i = 0; i < V.rows(); ++i) {
        for (std::size_t j = 0; j < V.cols(); ++j) {
            V(i, j) *= w[j];
            anti[j] = std::max(anti[j], V(i, j));
        }
    }
    Decision d;
    d.scores.resize(F.rows());
    for (std::size_t i = 0; i < V.rows(); ++i) {
        double plus = 0.0;
        double minus = 0.0;
        for (std::size_t j = 0; j < V.cols(); ++j) {
            plus += V(i, j) * V(i, j);
            minus += (anti[j] - V(i, j)) * (anti[j] - V(i, j));
        }
        plus = std::sqrt(plus);
        minus = std::sqrt(minus);
        const double denom = plus + minus;
        const double c = denom > 0.0 ? minus / denom : 0.0;
        d.scores[i] = c;
        if (i == 0 || c > d.score) {
            d.index = i;
            d.score = c;
        }
    }
    return d;
}

Decision decide(const Matrix& F, DecisionMethod method, std::span<const double> weights) {
    return method == DecisionMethod::topsis ? topsis_decide(F, weights) : weighted_sum_decide(F, weights);
}

std::string front_hash(const Matrix& F) {
    const std::string text = canonical_dump(matrix_to_json(F));
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    std::string hex;
    hex.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

json to_json(const DecisionSnapshot& s) {
    json j = {{"run_id", s.run_id},
              {"method", std::string(to_string(s.method))},
              {"weights", s.weights},
              {"original_weights", s.original_weights},
              {"selected_index", s.selected_index},
              {"payload_row", s.payload_row},
              {"score", number_to_json(s.score)},
              {"normalized_row", s.normalized_row},
              {"created_at", s.created_at},
              {"front_hash", s.front_hash},
              {"meta", s.meta}};
    j["objective_values"] = s.objective_values ? json(*s.objective_values) : json(nullptr);
    return j;
}

DecisionSnapshot decision_snapshot_from_json(const json& j) {
    try {
        DecisionSnapshot s;
        s.run_id = j.at("run_id").get<std::string>();
        s.method = decision_method_from_string(j.at("method").get<std::string>());
        s.weights = j.at("weights").get<std::vector<double>>();
        s.original_weights = j.value("original_weights", std::vector<double>{});
        s.selected_index = j.at("selected_index").get<std::size_t>();
        s.payload_row = j.value("payload_row", s.selected_index);
        s.score = number_from_json(j.at("score"));
        s.normalized_row = j.at("normalized_row").get<std::vector<double>>();
        if (j.contains("objective_values") && !j.at("objective_values").is_null()) {
            s.objective_values = j.at("objective_values").get<std::vector<double>>();
        }
        s.created_at = j.at("created_at").get<std::string>();
        s.front_hash = j.at("front_hash").get<std::string>();
        s.meta = j.value("meta", std::map<std::string, std::string>{});
        return s;
    } catch (const json::exception& e) {
        throw LoadError("decision", e.what());
    }
}

std::filesystem::path sidecar_path(const std::filesystem::path& payload_path, std::string_view run_id) {
    return payload_path.parent_path() / (std::string(run_id) + kDecisionExtension);
}

DecisionSnapshot decide_and_snapshot(const RunPayload& payload, DecisionMethod method, std::span<const double> weights,
                                     const std::optional<std::filesystem::path>& payload_path) {
    const Matrix front = payload.nondominated_front();
    if (front.rows() == 0) throw DecisionError(fmt::format("run '{}' has an empty nondominated front", payload.run_id));
    if (!weights.empty() && weights.size() != front.cols()) {
        throw ConfigurationError(fmt::format("expected {} weights, got {}", front.cols(), weights.size()), "weights");
    }
    const Decision d = decide(front, method, weights);
    const Matrix normalized = normalize_front(front);

    DecisionSnapshot s;
    s.run_id = payload.run_id;
    s.method = method;
    s.weights = normalize_weights(weights, front.cols());
    s.original_weights.assign(weights.begin(), weights.end());
    s.selected_index = d.index;
    s.payload_row = payload.nondominated_indices[d.index];
    s.score = d.score;
    const auto row = normalized.row(d.index);
    s.normalized_row.assign(row.begin(), row.end());
    if (front.cols() > 3) {
        const auto f = front.row(d.index);
        s.objective_values = std::vector<double>(f.begin(), f.end());
    }
    s.created_at = utc_timestamp();
    s.front_hash = front_hash(front);
    s.meta["tie_break"] = "lowest_index";
    s.meta["normalization"] = "min_max";
    s.meta["zero_range"] = "maps_to_0";
    if (method == DecisionMethod::topsis) {
        s.meta["ideal"] = "zeros";
        s.meta["anti_ideal"] = "column_max_weighted";
        s.meta["degenerate_closeness"] = "0";
    }
    if (payload_path) write_file_atomically(sidecar_path(*payload_path, payload.run_id), canonical_dump(to_json(s)) + "\n");
    return s;
}

}  // namespace lab
