#include "lab/orchestrator/payload.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "lab/dominance.hpp"
#include "lab/errors.hpp"
#include "lab/json_util.hpp"

namespace lab {

const MetricHistory* RunPayload::history(std::string_view metric_id) const {
    for (const auto& h : metric_histories) {
        if (h.metric_id == metric_id) return &h;
    }
    return nullptr;
}

nlohmann::json to_json(const RunPayload& p) {
    nlohmann::json j;
    j["schema_version"] = p.schema_version;
    j["run_id"] = p.run_id;
    j["status"] = p.status;
    j["error"] = p.error.empty() ? nlohmann::json(nullptr) : nlohmann::json(p.error);
    j["problem"] = {{"id", p.problem.id},
                    {"n_obj", p.problem.n_obj},
                    {"n_var", p.problem.n_var},
                    {"overrides", p.problem.overrides}};
    j["algorithm"] = to_json(p.algorithm);
    j["seed"] = p.seed;
    j["backend"] = p.backend;
    j["fe_budget"] = p.fe_budget;
    j["fe_used"] = p.fe_used;
    j["generations"] = p.generations;
    j["metrics"] = nlohmann::json::array();
    for (const auto& m : p.metrics) j["metrics"].push_back(to_json(m));
    j["metric_histories"] = nlohmann::json::array();
    for (const auto& h : p.metric_histories) {
        auto points = nlohmann::json::array();
        for (const auto& pt : h.points) points.push_back({{"fe", pt.fe}, {"value", number_to_json(pt.value)}});
        j["metric_histories"].push_back({{"metric_id", h.metric_id}, {"points", std::move(points)}});
    }
    j["final_X"] = matrix_to_json(p.final_X);
    j["final_F"] = matrix_to_json(p.final_F);
    j["final_G"] = matrix_to_json(p.final_G);
    j["final_H"] = matrix_to_json(p.final_H);
    j["nondominated_indices"] = p.nondominated_indices;
    j["wall_time_ms"] = p.wall_time_ms;
    j["log"] = p.log;
    j["meta"] = p.meta;
    return j;
}

namespace {

const nlohmann::json& require(const nlohmann::json& j, const char* field) {
    if (!j.contains(field)) throw LoadError(field, "missing");
    return j[field];
}

template <typename T>
T read_as(const nlohmann::json& j, const char* field) {
    try {
        return require(j, field).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(field, e.what());
    }
}

Matrix read_matrix(const nlohmann::json& j, const char* field) {
    try {
        return matrix_from_json(require(j, field));
    } catch (const LoadError&) {
        throw;
    } catch (const std::exception& e) {
        throw LoadError(field, e.what());
    }
}

}  // namespace

RunPayload payload_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw LoadError("$", "payload must be a JSON object");
    RunPayload p;
    p.schema_version = read_as<int>(j, "schema_version");
    if (p.schema_version != kPayloadSchemaVersion) {
        throw LoadError("schema_version", fmt::format("unsupported version {} (expected {})", p.schema_version,
                                                      kPayloadSchemaVersion));
    }
    p.run_id = read_as<std::string>(j, "run_id");
    p.status = read_as<std::string>(j, "status");
    if (p.status != "completed" && p.status != "failed") throw LoadError("status", "unknown status " + p.status);
    if (!require(j, "error").is_null()) p.error = read_as<std::string>(j, "error");

    const auto& problem = require(j, "problem");
    p.problem.id = read_as<std::string>(problem, "id");
    p.problem.n_obj = read_as<std::size_t>(problem, "n_obj");
    p.problem.n_var = read_as<std::size_t>(problem, "n_var");
    p.problem.overrides = problem.value("overrides", nlohmann::json::object());

    try {
        p.algorithm = algorithm_config_from_json(require(j, "algorithm"));
    } catch (const ConfigurationError& e) {
        throw LoadError("algorithm", e.what());
    }
    p.seed = read_as<std::uint64_t>(j, "seed");
    p.backend = read_as<std::string>(j, "backend");
    p.fe_budget = read_as<std::size_t>(j, "fe_budget");
    p.fe_used = read_as<std::size_t>(j, "fe_used");
    p.generations = read_as<std::size_t>(j, "generations");
    if (p.fe_used > p.fe_budget) throw LoadError("fe_used", "exceeds fe_budget");

    for (const auto& m : require(j, "metrics")) {
        try {
            p.metrics.push_back(metric_spec_from_json(m));
        } catch (const ConfigurationError& e) {
            throw LoadError("metrics", e.what());
        }
    }
    std::size_t h_index = 0;
    for (const auto& h : require(j, "metric_histories")) {
        const std::string field = fmt::format("metric_histories[{}]", h_index++);
        MetricHistory history;
        try {
            history.metric_id = h.at("metric_id").get<std::string>();
            for (const auto& pt : h.at("points")) {
                history.points.push_back({pt.at("fe").get<std::size_t>(), number_from_json(pt.at("value"))});
            }
        } catch (const nlohmann::json::exception& e) {
            throw LoadError(field, e.what());
        }
        for (std::size_t k = 1; k < history.points.size(); ++k) {
            if (history.points[k].fe <= history.points[k - 1].fe) {
                throw LoadError(field + ".points", "fe must be strictly increasing");
            }
        }
        p.metric_histories.push_back(std::move(history));
    }

    p.final_X = read_matrix(j, "final_X");
    p.final_F = read_matrix(j, "final_F");
    p.final_G = read_matrix(j, "final_G");
    p.final_H = read_matrix(j, "final_H");
    const std::size_t n = p.final_F.rows();
    if (p.final_X.rows() != n) throw LoadError("final_X", "row count differs from final_F");
    if (p.final_G.rows() != n) throw LoadError("final_G", "row count differs from final_F");
    if (p.final_H.rows() != n) throw LoadError("final_H", "row count differs from final_F");
    if (n > 0 && p.final_F.cols() != p.problem.n_obj) throw LoadError("final_F", "column count differs from n_obj");
    if (n > 0 && p.final_X.cols() != p.problem.n_var) throw LoadError("final_X", "column count differs from n_var");

    p.nondominated_indices = read_as<std::vector<std::size_t>>(j, "nondominated_indices");
    if (p.nondominated_indices != nondominated_filter(p.final_F)) {
        throw LoadError("nondominated_indices", "does not match the nondominated rows of final_F");
    }
    p.wall_time_ms = read_as<std::int64_t>(j, "wall_time_ms");
    p.log = read_as<std::vector<std::string>>(j, "log");
    p.meta = read_as<std::map<std::string, std::string>>(j, "meta");
    return p;
}

std::string replay_fingerprint(const RunPayload& payload) {
    auto j = to_json(payload);
    j.erase("run_id");
    j.erase("wall_time_ms");
    j.erase("log");
    return canonical_dump(j);
}

void write_file_atomically(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += fmt::format(".tmp-{}", make_uuid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out << text;
        if (!out) throw Error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void persist(const RunPayload& payload, const std::filesystem::path& path) {
    write_file_atomically(path, canonical_dump(to_json(payload)) + "\n");
}

RunPayload load(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw LoadError("$", e.what());
    }
    return payload_from_json(j);
}

}  // namespace lab
