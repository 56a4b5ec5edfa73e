#include "lab/problem.hpp"

#include <fmt/format.h>

#include "lab/errors.hpp"

namespace lab {

ObjectiveBatch ObjectiveBatch::select_rows(std::span<const std::size_t> indices) const {
    return {F.select_rows(indices), G.select_rows(indices), H.select_rows(indices)};
}

void ObjectiveBatch::append(const ObjectiveBatch& other) {
    F.append_rows(other.F);
    G.append_rows(other.G);
    H.append_rows(other.H);
}

ObjectiveBatch ProblemInstance::evaluate(const Matrix& X) const {
    if (X.cols() != n_var) {
        throw ContractViolation(
            fmt::format("problem '{}' expects {} variables, got {}", id, n_var, X.cols()));
    }
    ObjectiveBatch out = evaluator(X);
    // Unconstrained evaluators may leave G/H default-constructed.
    if (out.G.rows() == 0 && n_ieq == 0) out.G = Matrix(X.rows(), 0);
    if (out.H.rows() == 0 && n_eq == 0) out.H = Matrix(X.rows(), 0);
    if (out.F.rows() != X.rows() || out.G.rows() != X.rows() || out.H.rows() != X.rows()) {
        throw ContractViolation(fmt::format("problem '{}' returned a batch with the wrong row count", id));
    }
    if (out.F.cols() != n_obj || out.G.cols() != n_ieq || out.H.cols() != n_eq) {
        throw ContractViolation(fmt::format(
            "problem '{}' returned F/G/H widths {}/{}/{}, declared {}/{}/{}", id, out.F.cols(),
            out.G.cols(), out.H.cols(), n_obj, n_ieq, n_eq));
    }
    return out;
}

void validate_problem(const ProblemInstance& problem) {
    if (problem.n_var == 0) throw ContractViolation("problem needs at least one variable");
    if (problem.n_obj == 0) throw ContractViolation("problem needs at least one objective");
    if (problem.lower.size() != problem.n_var || problem.upper.size() != problem.n_var) {
        throw ContractViolation("bound vectors must have n_var entries");
    }
    for (std::size_t i = 0; i < problem.n_var; ++i) {
        if (!(problem.lower[i] < problem.upper[i])) {
            throw ContractViolation(fmt::format("lower[{}] must be below upper[{}]", i, i));
        }
    }
    if (!problem.evaluator) throw ContractViolation("problem has no evaluator");
}

void require_within_bounds(const Matrix& X, std::span<const double> lower,
                           std::span<const double> upper, const char* who) {
    for (std::size_t r = 0; r < X.rows(); ++r) {
        auto x = X.row(r);
        for (std::size_t c = 0; c < X.cols(); ++c) {
            if (!(x[c] >= lower[c] && x[c] <= upper[c])) {
                throw ContractViolation(
                    fmt::format("{}: row {} variable {} = {} outside [{}, {}]", who, r, c + 1, x[c],
                                lower[c], upper[c]));
            }
        }
    }
}

}  // namespace lab
