#pragma once

#include <cstddef>
#include <vector>

#include "lab/matrix.hpp"
#include "lab/problem.hpp"

namespace lab {

struct Population {
    Matrix X;
    ObjectiveBatch batch;
    std::vector<std::size_t> rank;  // nsga2 only
    std::vector<double> crowding;   // nsga2 only

    std::size_t size() const noexcept { return X.rows(); }
};

/// Decomposition bookkeeping carried between MOEA/D steps.
struct DecompositionContext {
    Matrix weights;
    std::vector<std::vector<std::size_t>> neighbors;
    std::size_t partitions = 0;
};

struct RunState {
    std::size_t generation = 0;
    std::size_t fe_used = 0;
    std::size_t fe_budget = 0;
    Population population;
    std::vector<double> ideal_point;  // moead
    DecompositionContext decomposition;
    bool finished = false;
};

}  // namespace lab
