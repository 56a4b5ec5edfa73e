#include "lab/dominance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lab/errors.hpp"

namespace lab {

bool dominates(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ContractViolation("dominates: vectors differ in length");
    bool strictly_better = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] < b[i]) strictly_better = true;
    }
    return strictly_better;
}

double constraint_violation(std::span<const double> g, std::span<const double> h, double eps_eq) {
    double total = 0.0;
    for (double v : g) total += std::max(v, 0.0);
    for (double v : h) total += std::max(std::abs(v) - eps_eq, 0.0);
    return total;
}

std::vector<double> constraint_violations(const ObjectiveBatch& batch, double eps_eq) {
    std::vector<double> out(batch.size(), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::span<const double> g = batch.G.rows() ? batch.G.row(i) : std::span<const double>{};
        std::span<const double> h = batch.H.rows() ? batch.H.row(i) : std::span<const double>{};
        out[i] = constraint_violation(g, h, eps_eq);
    }
    return out;
}

bool constrained_dominates(const SolutionRecord& a, const SolutionRecord& b) {
    if (a.feasible() && !b.feasible()) return true;
    if (!a.feasible() && b.feasible()) return false;
    if (!a.feasible()) return a.violation < b.violation;
    return dominates(a.f, b.f);
}

std::vector<std::size_t> nondominated_filter(const Matrix& F) {
    // Any dominator of a row precedes it lexicographically, so scanning rows in
    // lexicographic order and testing only against the survivors is exact.
    std::vector<std::size_t> order(F.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        auto ra = F.row(a);
        auto rb = F.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    });

    std::vector<std::size_t> kept;
    for (std::size_t i : order) {
        auto candidate = F.row(i);
        bool dominated = std::any_of(kept.begin(), kept.end(),
                                     [&](std::size_t k) { return dominates(F.row(k), candidate); });
        if (!dominated) kept.push_back(i);
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

std::vector<std::size_t> nondominated_filter(const FrontApproximation& front) {
    return nondominated_filter(front.F);
}

}  // namespace lab
