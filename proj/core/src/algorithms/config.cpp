#include "lab/algorithms/config.hpp"

#include <fmt/format.h>

#include "lab/errors.hpp"

namespace lab {

std::string_view to_string(AlgorithmId id) {
    switch (id) {
        case AlgorithmId::nsga2: return "nsga2";
        case AlgorithmId::moead: return "moead";
    }
    return "unknown";
}

AlgorithmId algorithm_id_from_string(std::string_view text) {
    if (text == "nsga2") return AlgorithmId::nsga2;
    if (text == "moead") return AlgorithmId::moead;
    throw ConfigurationError(fmt::format("unknown algorithm '{}'", text), "algorithm_id");
}

AlgorithmConfig AlgorithmConfig::defaults(AlgorithmId id) {
    AlgorithmConfig c;
    c.algorithm_id = id;
    return c;
}

void AlgorithmConfig::validate() const {
    auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (algorithm_id == AlgorithmId::nsga2 && (pop_size < 4 || pop_size % 2 != 0)) {
        throw ConfigurationError("nsga2 needs an even pop_size of at least 4", "pop_size");
    }
    if (algorithm_id == AlgorithmId::moead && pop_size < 2) {
        throw ConfigurationError("moead needs pop_size >= 2", "pop_size");
    }
    if (!prob_ok(crossover_prob)) throw ConfigurationError("crossover_prob must lie in [0,1]", "crossover_prob");
    if (!(crossover_eta > 0.0)) throw ConfigurationError("crossover_eta must be positive", "crossover_eta");
    if (mutation_prob && !prob_ok(*mutation_prob)) {
        throw ConfigurationError("mutation_prob must lie in [0,1]", "mutation_prob");
    }
    if (!(mutation_eta > 0.0)) throw ConfigurationError("mutation_eta must be positive", "mutation_eta");
    if (moead_neighborhood < 2) {
        throw ConfigurationError("moead_neighborhood must be at least 2", "moead_neighborhood");
    }
    if (moead_max_replacements < 1) {
        throw ConfigurationError("moead_max_replacements must be positive", "moead_max_replacements");
    }
    if (!prob_ok(moead_delta)) throw ConfigurationError("moead_delta must lie in [0,1]", "moead_delta");
}

nlohmann::json to_json(const AlgorithmConfig& c) {
    nlohmann::json j;
    j["algorithm_id"] = std::string(to_string(c.algorithm_id));
    j["pop_size"] = c.pop_size;
    j["crossover_prob"] = c.crossover_prob;
    j["crossover_eta"] = c.crossover_eta;
    j["mutation_prob"] = c.mutation_prob ? nlohmann::json(*c.mutation_prob) : nlohmann::json(nullptr);
    j["mutation_eta"] = c.mutation_eta;
    j["moead_neighborhood"] = c.moead_neighborhood;
    j["moead_max_replacements"] = c.moead_max_replacements;
    j["moead_delta"] = c.moead_delta;
    return j;
}

namespace {

std::size_t read_count(const nlohmann::json& v, const char* field) {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw ConfigurationError(fmt::format("{} must be a non-negative integer", field), field);
    }
    return v.get<std::size_t>();
}

double read_real(const nlohmann::json& v, const char* field) {
    if (!v.is_number()) throw ConfigurationError(fmt::format("{} must be a number", field), field);
    return v.get<double>();
}

}  // namespace

AlgorithmConfig algorithm_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigurationError("algorithm config must be an object", "algorithm");
    if (!j.contains("algorithm_id") || !j["algorithm_id"].is_string()) {
        throw ConfigurationError("algorithm_id is required", "algorithm_id");
    }
    auto c = AlgorithmConfig::defaults(algorithm_id_from_string(j["algorithm_id"].get<std::string>()));
    for (const auto& [key, value] : j.items()) {
        if (key == "algorithm_id") continue;
        if (key == "pop_size") c.pop_size = read_count(value, "pop_size");
        else if (key == "crossover_prob") c.crossover_prob = read_real(value, "crossover_prob");
        else if (key == "crossover_eta") c.crossover_eta = read_real(value, "crossover_eta");
        else if (key == "mutation_prob") {
            if (value.is_null()) c.mutation_prob.reset();
            else c.mutation_prob = read_real(value, "mutation_prob");
        } else if (key == "mutation_eta") c.mutation_eta = read_real(value, "mutation_eta");
        else if (key == "moead_neighborhood") c.moead_neighborhood = read_count(value, "moead_neighborhood");
        else if (key == "moead_max_replacements") {
            c.moead_max_replacements = read_count(value, "moead_max_replacements");
        } else if (key == "moead_delta") c.moead_delta = read_real(value, "moead_delta");
        else throw ConfigurationError(fmt::format("unknown algorithm setting '{}'", key), key);
    }
    c.validate();
    return c;
}

std::vector<AlgorithmCatalogEntry> algorithm_catalog() {
    return {
        {"nsga2", "NSGA-II", {"dominance-based", "elitist", "real"}, AlgorithmConfig::defaults(AlgorithmId::nsga2)},
        {"moead", "MOEA/D", {"decomposition-based", "tchebycheff", "real"},
         AlgorithmConfig::defaults(AlgorithmId::moead)},
    };
}

}  // namespace lab
