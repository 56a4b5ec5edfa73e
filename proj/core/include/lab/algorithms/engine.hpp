#pragma once

#include "lab/algorithms/config.hpp"
#include "lab/algorithms/moead.hpp"
#include "lab/algorithms/nsga2.hpp"
#include "lab/algorithms/state.hpp"

namespace lab {

/// Fills problem-dependent defaults: mutation_prob = 1/D, and for MOEA/D the
/// population size of the weight lattice with the neighborhood capped at it.
AlgorithmConfig resolve_config(AlgorithmConfig config, const ProblemInstance& problem);

RunState initialize_run(const ProblemInstance& problem, const AlgorithmConfig& resolved,
                        std::size_t fe_budget, Rng& rng);

RunState step_run(RunState state, const AlgorithmConfig& resolved, const ProblemInstance& problem,
                  Rng& rng);

}  // namespace lab
