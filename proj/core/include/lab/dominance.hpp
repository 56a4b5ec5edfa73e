#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lab/matrix.hpp"
#include "lab/problem.hpp"

namespace lab {

/// Tolerance under which an equality constraint counts as satisfied.
inline constexpr double kEqualityTolerance = 1e-4;

/// Minimization Pareto dominance: a <= b everywhere and a < b somewhere.
bool dominates(std::span<const double> a, std::span<const double> b);

/// Sum of max(g, 0) plus sum of max(|h| - eps_eq, 0).
double constraint_violation(std::span<const double> g, std::span<const double> h,
                            double eps_eq = kEqualityTolerance);

/// Per-row violations of a batch.
std::vector<double> constraint_violations(const ObjectiveBatch& batch,
                                          double eps_eq = kEqualityTolerance);

/// An evaluated solution reduced to what constraint-domination needs.
struct SolutionRecord {
    std::span<const double> f;
    double violation = 0.0;

    bool feasible() const noexcept { return violation <= 0.0; }
};

/// Feasibility-first constraint domination.
bool constrained_dominates(const SolutionRecord& a, const SolutionRecord& b);

/// Indices of rows not dominated by any other row, ascending. Duplicated rows are
/// all retained since equal vectors never dominate each other.
std::vector<std::size_t> nondominated_filter(const Matrix& F);
std::vector<std::size_t> nondominated_filter(const FrontApproximation& front);

}  // namespace lab
