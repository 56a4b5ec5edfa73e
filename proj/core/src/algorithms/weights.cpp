#include "lab/algorithms/weights.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lab/errors.hpp"

namespace lab {

namespace {

void fill_lattice(std::size_t n_obj, std::size_t partitions, std::size_t remaining,
                  std::vector<std::size_t>& current, Matrix& out) {
    if (current.size() + 1 == n_obj) {
        current.push_back(remaining);
        std::vector<double> row(n_obj);
        for (std::size_t i = 0; i < n_obj; ++i) {
            row[i] = static_cast<double>(current[i]) / static_cast<double>(partitions);
        }
        out.append_row(row);
        current.pop_back();
        return;
    }
    for (std::size_t k = 0; k <= remaining; ++k) {
        current.push_back(k);
        fill_lattice(n_obj, partitions, remaining - k, current, out);
        current.pop_back();
    }
}

}  // namespace

Matrix das_dennis_weights(std::size_t n_obj, std::size_t partitions) {
    if (n_obj < 2) throw ContractViolation("das_dennis_weights: need at least two objectives");
    if (partitions < 1) throw ContractViolation("das_dennis_weights: need at least one partition");
    Matrix out(0, n_obj);
    std::vector<std::size_t> current;
    current.reserve(n_obj);
    fill_lattice(n_obj, partitions, partitions, current, out);
    return out;
}

std::size_t lattice_size(std::size_t n_obj, std::size_t partitions) {
    // C(partitions + n_obj - 1, n_obj - 1) computed incrementally; exact for the
    // sizes used here.
    std::size_t k = n_obj - 1;
    std::size_t n = partitions + k;
    std::size_t result = 1;
    for (std::size_t i = 1; i <= k; ++i) result = result * (n - k + i) / i;
    return result;
}

std::size_t partitions_for_at_least(std::size_t n_obj, std::size_t min_points) {
    std::size_t h = 1;
    while (lattice_size(n_obj, h) < min_points) ++h;
    return h;
}

double tchebycheff(std::span<const double> f, std::span<const double> lambda,
                   std::span<const double> z_star) {
    if (f.size() != lambda.size() || f.size() != z_star.size()) {
        throw ContractViolation("tchebycheff: length mismatch");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        double w = lambda[i] == 0.0 ? 1e-6 : lambda[i];
        worst = std::max(worst, w * std::abs(f[i] - z_star[i]));
    }
    return worst;
}

}  // namespace lab
