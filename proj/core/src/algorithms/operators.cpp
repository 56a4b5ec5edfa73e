#include "lab/algorithms/operators.hpp"

#include <algorithm>
#include <cmath>

namespace lab {

namespace {

constexpr double kMinSpread = 1e-14;

double spread_factor(double beta, double eta, double u) {
    const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
    if (u <= 1.0 / alpha) return std::pow(u * alpha, 1.0 / (eta + 1.0));
    return std::pow(1.0 / (2.0 - u * alpha), 1.0 / (eta + 1.0));
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> sbx_crossover(std::span<const double> parent_a,
                                                                  std::span<const double> parent_b,
                                                                  double eta, double prob, Rng& rng,
                                                                  Bounds bounds) {
    std::vector<double> c1(parent_a.begin(), parent_a.end());
    std::vector<double> c2(parent_b.begin(), parent_b.end());
    if (rng.uniform() >= prob) return {std::move(c1), std::move(c2)};

    for (std::size_t i = 0; i < c1.size(); ++i) {
        if (rng.uniform() > 0.5) continue;
        if (std::abs(parent_a[i] - parent_b[i]) <= kMinSpread) continue;

        const double y1 = std::min(parent_a[i], parent_b[i]);
        const double y2 = std::max(parent_a[i], parent_b[i]);
        const double lo = bounds.lower[i];
        const double hi = bounds.upper[i];
        const double u = rng.uniform();

        double betaq = spread_factor(1.0 + 2.0 * (y1 - lo) / (y2 - y1), eta, u);
        double a = 0.5 * ((y1 + y2) - betaq * (y2 - y1));
        betaq = spread_factor(1.0 + 2.0 * (hi - y2) / (y2 - y1), eta, u);
        double b = 0.5 * ((y1 + y2) + betaq * (y2 - y1));

        a = std::clamp(a, lo, hi);
        b = std::clamp(b, lo, hi);
        if (rng.uniform() <= 0.5) std::swap(a, b);
        c1[i] = a;
        c2[i] = b;
    }
    return {std::move(c1), std::move(c2)};
}

std::vector<double> polynomial_mutation(std::span<const double> x, double eta, double prob, Rng& rng,
                                        Bounds bounds) {
    std::vector<double> y(x.begin(), x.end());
    const double power = 1.0 / (eta + 1.0);
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(rng.uniform() < prob)) continue;
        const double lo = bounds.lower[i];
        const double hi = bounds.upper[i];
        const double range = hi - lo;
        if (range <= 0.0) continue;

        const double delta1 = (y[i] - lo) / range;
        const double delta2 = (hi - y[i]) / range;
        const double u = rng.uniform();
        double deltaq = 0.0;
        if (u < 0.5) {
            const double val = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - delta1, eta + 1.0);
            deltaq = std::pow(val, power) - 1.0;
        } else {
            const double val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - delta2, eta + 1.0);
            deltaq = 1.0 - std::pow(val, power);
        }
        y[i] = std::clamp(y[i] + deltaq * range, lo, hi);
    }
    return y;
}

}  // namespace lab
