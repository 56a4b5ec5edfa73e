#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lab/problem.hpp"

namespace lab {

// Standard ZDT/DTLZ definitions. Each throws ContractViolation when a row
// leaves the problem's box.
ObjectiveBatch evaluate_zdt1(const Matrix& X);
ObjectiveBatch evaluate_zdt2(const Matrix& X);
ObjectiveBatch evaluate_zdt3(const Matrix& X);
ObjectiveBatch evaluate_zdt4(const Matrix& X);
ObjectiveBatch evaluate_zdt6(const Matrix& X);
ObjectiveBatch evaluate_dtlz1(const Matrix& X, std::size_t n_obj);
ObjectiveBatch evaluate_dtlz2(const Matrix& X, std::size_t n_obj);

/// Closed-form Pareto front. For bi-objective fronts f1 is sampled at
/// i/(n-1) of its range (n = 1 gives the f1-minimal endpoint); ZDT3 keeps the
/// nondominated subset of those samples. DTLZ fronts with three or more
/// objectives use the smallest simplex lattice holding at least n points.
/// Throws UnsupportedError for problems without a closed form.
FrontApproximation analytical_front(std::string_view problem_id, std::size_t n_points,
                                    std::size_t n_obj = 2);

/// Number of points in the reference fronts attached to benchmark instances.
inline constexpr std::size_t kReferenceFrontPoints = 1000;

struct CatalogEntry {
    std::string id;
    std::string name;
    std::set<std::string> tags;
    std::size_t default_n_obj = 2;
    std::size_t default_n_var = 0;
    bool scalable_objectives = false;
    std::string kind = "builtin";
};

std::vector<CatalogEntry> benchmark_catalog();

/// Builds a benchmark instance with its analytical reference front.
/// Unset dimensions take the conventional defaults (ZDT1/2/3: D=30, ZDT4/6: D=10,
/// DTLZ: M=3, D=M+4).
ProblemPtr make_benchmark(std::string_view id, std::optional<std::size_t> n_obj = std::nullopt,
                          std::optional<std::size_t> n_var = std::nullopt);

bool is_benchmark(std::string_view id);

}  // namespace lab
