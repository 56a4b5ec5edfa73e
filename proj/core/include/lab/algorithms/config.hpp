#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace lab {

enum class AlgorithmId { nsga2, moead };

std::string_view to_string(AlgorithmId id);
AlgorithmId algorithm_id_from_string(std::string_view text);

/// Operator and population settings. Defaults are the conventional ones for each
/// engine; `mutation_prob` unset means 1/D, resolved once the problem is known.
struct AlgorithmConfig {
    AlgorithmId algorithm_id = AlgorithmId::nsga2;
    std::size_t pop_size = 100;
    double crossover_prob = 0.9;
    double crossover_eta = 15.0;
    std::optional<double> mutation_prob;
    double mutation_eta = 20.0;
    std::size_t moead_neighborhood = 20;
    std::size_t moead_max_replacements = 2;
    double moead_delta = 0.9;

    static AlgorithmConfig defaults(AlgorithmId id);

    double mutation_probability(std::size_t n_var) const {
        return mutation_prob.value_or(1.0 / static_cast<double>(n_var));
    }

    /// Throws ConfigurationError naming the first invalid field.
    void validate() const;

    friend bool operator==(const AlgorithmConfig&, const AlgorithmConfig&) = default;
};

nlohmann::json to_json(const AlgorithmConfig& config);
/// Starts from the defaults of `algorithm_id` and applies the given keys;
/// unknown keys and out-of-range values raise ConfigurationError.
AlgorithmConfig algorithm_config_from_json(const nlohmann::json& j);

struct AlgorithmCatalogEntry {
    std::string id;
    std::string name;
    std::set<std::string> tags;
    AlgorithmConfig defaults;
};

std::vector<AlgorithmCatalogEntry> algorithm_catalog();

}  // namespace lab
