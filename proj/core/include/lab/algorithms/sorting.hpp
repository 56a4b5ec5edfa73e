#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lab/matrix.hpp"

namespace lab {

/// Pareto rank of every row (0 = nondominated). When `violations` is non-empty
/// the comparison is feasibility-first constraint domination.
std::vector<std::size_t> fast_nondominated_sort(const Matrix& F,
                                                std::span<const double> violations = {});

/// Groups row indices by rank, each group ascending.
std::vector<std::vector<std::size_t>> fronts_from_ranks(std::span<const std::size_t> ranks);

/// Crowding distance of rows that share a rank. Boundary rows are +inf; an
/// objective with zero range contributes nothing.
std::vector<double> crowding_distance(const Matrix& F);

}  // namespace lab
