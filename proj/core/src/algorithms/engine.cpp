#include "lab/algorithms/engine.hpp"

#include <algorithm>

#include "lab/algorithms/weights.hpp"

namespace lab {

AlgorithmConfig resolve_config(AlgorithmConfig config, const ProblemInstance& problem) {
    config.validate();
    if (!config.mutation_prob) config.mutation_prob = 1.0 / static_cast<double>(problem.n_var);
    if (config.algorithm_id == AlgorithmId::moead) {
        config.pop_size = lattice_size(problem.n_obj, partitions_for_at_least(problem.n_obj, config.pop_size));
        config.moead_neighborhood = std::min(config.moead_neighborhood, config.pop_size);
    }
    return config;
}

RunState initialize_run(const ProblemInstance& problem, const AlgorithmConfig& resolved,
                        std::size_t fe_budget, Rng& rng) {
    if (resolved.algorithm_id == AlgorithmId::moead) return moead_initialize(problem, resolved, fe_budget, rng);
    return nsga2_initialize(problem, resolved, fe_budget, rng);
}

RunState step_run(RunState state, const AlgorithmConfig& resolved, const ProblemInstance& problem, Rng& rng) {
    if (resolved.algorithm_id == AlgorithmId::moead) return moead_step(std::move(state), resolved, problem, rng);
    return nsga2_step(std::move(state), resolved, problem, rng);
}

}  // namespace lab
