#pragma once

#include <cstddef>
#include <vector>

#include "lab/algorithms/config.hpp"
#include "lab/algorithms/state.hpp"
#include "lab/rng.hpp"

namespace lab {

struct MoeadTrace {
    std::vector<std::size_t> replacements_per_child;
};

/// Builds the weight lattice (smallest lattice with at least pop_size vectors),
/// the T-nearest neighborhoods and the initial population.
RunState moead_initialize(const ProblemInstance& problem, const AlgorithmConfig& config,
                          std::size_t fe_budget, Rng& rng);

/// One pass over all subproblems in index order. Stops at the subproblem where
/// the budget runs out.
RunState moead_step(RunState state, const AlgorithmConfig& config, const ProblemInstance& problem,
                    Rng& rng, MoeadTrace* trace = nullptr);

}  // namespace lab
