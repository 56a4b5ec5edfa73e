#pragma once

#include <cstddef>
#include <span>

#include "lab/matrix.hpp"

namespace lab {

/// Simplex-lattice weight vectors: every vector with components i/partitions
/// summing to one, in lexicographic order. W = C(partitions + M - 1, M - 1).
Matrix das_dennis_weights(std::size_t n_obj, std::size_t partitions);

std::size_t lattice_size(std::size_t n_obj, std::size_t partitions);

/// Smallest partition count whose lattice holds at least `min_points` vectors.
std::size_t partitions_for_at_least(std::size_t n_obj, std::size_t min_points);

/// max_i lambda_i * |f_i - z_i|, with zero weights replaced by 1e-6.
double tchebycheff(std::span<const double> f, std::span<const double> lambda,
                   std::span<const double> z_star);

}  // namespace lab
