#pragma once

#include <cstddef>
#include <vector>

#include "lab/algorithms/config.hpp"
#include "lab/algorithms/state.hpp"
#include "lab/rng.hpp"

namespace lab {

/// Survivors chosen from a merged parent+offspring batch.
struct SurvivorSelection {
    std::vector<std::size_t> indices;  // into the merged batch
    std::vector<std::size_t> rank;     // per survivor
    std::vector<double> crowding;      // per survivor
    std::vector<std::size_t> merged_rank;
};

/// Fills N slots front by front; the last partial front is truncated by
/// descending crowding distance, ties to the lower index.
SurvivorSelection select_survivors(const ObjectiveBatch& merged, std::size_t n, bool constrained);

/// Observation hook for tests: the merged objectives and who survived.
struct Nsga2Trace {
    Matrix merged_F;
    std::vector<std::size_t> merged_rank;
    std::vector<std::size_t> survivors;
};

RunState nsga2_initialize(const ProblemInstance& problem, const AlgorithmConfig& config,
                          std::size_t fe_budget, Rng& rng);

RunState nsga2_step(RunState state, const AlgorithmConfig& config, const ProblemInstance& problem,
                    Rng& rng, Nsga2Trace* trace = nullptr);

}  // namespace lab
