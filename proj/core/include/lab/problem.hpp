#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lab/matrix.hpp"

namespace lab {

/// Output of one batch evaluation. Rows correspond to the input rows.
/// Inequality constraints are feasible when G <= 0, equalities when |H| <= eps_eq.
struct ObjectiveBatch {
    Matrix F;
    Matrix G;
    Matrix H;

    std::size_t size() const noexcept { return F.rows(); }
    ObjectiveBatch select_rows(std::span<const std::size_t> indices) const;
    void append(const ObjectiveBatch& other);
};

using BatchEvaluator = std::function<ObjectiveBatch(const Matrix& X)>;

/// A set of objective vectors, optionally with the decision vectors that produced them.
struct FrontApproximation {
    Matrix F;
    std::optional<Matrix> X;
    std::string problem_id;
    std::map<std::string, std::string> meta;
};

/// Immutable description of a continuous box-constrained problem. Instances are
/// shared as `std::shared_ptr<const ProblemInstance>` across workers.
struct ProblemInstance {
    std::string id;
    std::string name;
    std::size_t n_var = 0;
    std::size_t n_obj = 0;
    std::size_t n_ieq = 0;
    std::size_t n_eq = 0;
    std::vector<double> lower;
    std::vector<double> upper;
    BatchEvaluator evaluator;
    std::optional<FrontApproximation> reference_front;
    std::set<std::string> tags;

    bool constrained() const noexcept { return n_ieq + n_eq > 0; }

    /// Evaluates X and checks the output shape against the declared counts.
    ObjectiveBatch evaluate(const Matrix& X) const;
};

using ProblemPtr = std::shared_ptr<const ProblemInstance>;

/// Throws ContractViolation when bounds or counts are inconsistent.
void validate_problem(const ProblemInstance& problem);

/// Throws ContractViolation if any row of X leaves [lower, upper].
void require_within_bounds(const Matrix& X, std::span<const double> lower,
                           std::span<const double> upper, const char* who);

}  // namespace lab
