#pragma once

#include <span>
#include <utility>
#include <vector>

#include "lab/rng.hpp"

namespace lab {

struct Bounds {
    std::span<const double> lower;
    std::span<const double> upper;
};

/// Simulated binary crossover with bounded spread (Deb & Agrawal). With
/// probability 1 - prob the parents are returned unchanged; otherwise each
/// variable is recombined with probability 0.5 and children may swap.
std::pair<std::vector<double>, std::vector<double>> sbx_crossover(std::span<const double> parent_a,
                                                                  std::span<const double> parent_b,
                                                                  double eta, double prob, Rng& rng,
                                                                  Bounds bounds);

/// Bounded polynomial mutation, applied per variable with probability `prob`.
std::vector<double> polynomial_mutation(std::span<const double> x, double eta, double prob, Rng& rng,
                                        Bounds bounds);

}  // namespace lab
