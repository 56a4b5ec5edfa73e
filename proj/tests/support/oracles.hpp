#pragma once

// Independent reference implementations used by the unit and acceptance
// suites. They favor the most literal formulation over speed and share no
// code with the library beyond the Matrix container.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "lab/matrix.hpp"
#include "lab/rng.hpp"

namespace oracle {

inline bool dominates(std::span<const double> a, std::span<const double> b) {
    std::size_t not_worse = 0;
    std::size_t better = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] <= b[i]) ++not_worse;
        if (a[i] < b[i]) ++better;
    }
    return not_worse == a.size() && better > 0;
}

inline std::vector<std::size_t> nondominated(const lab::Matrix& F, const std::vector<std::size_t>& among) {
    std::vector<std::size_t> out;
    for (std::size_t i : among) {
        bool dominated = false;
        for (std::size_t j : among) dominated = dominated || (i != j && dominates(F.row(j), F.row(i)));
        if (!dominated) out.push_back(i);
    }
    return out;
}

inline std::vector<std::size_t> nondominated(const lab::Matrix& F) {
    std::vector<std::size_t> all(F.rows());
    std::iota(all.begin(), all.end(), 0);
    return nondominated(F, all);
}

/// Ranks by repeatedly peeling the nondominated layer.
inline std::vector<std::size_t> peel_ranks(const lab::Matrix& F) {
    std::vector<std::size_t> rank(F.rows(), 0);
    std::vector<std::size_t> remaining(F.rows());
    std::iota(remaining.begin(), remaining.end(), 0);
    for (std::size_t layer = 0; !remaining.empty(); ++layer) {
        auto front = nondominated(F, remaining);
        for (std::size_t i : front) rank[i] = layer;
        std::vector<std::size_t> rest;
        std::set_difference(remaining.begin(), remaining.end(), front.begin(), front.end(), std::back_inserter(rest));
        remaining = std::move(rest);
    }
    return rank;
}

/// O(R·A) mean of minimum distances using the generic p-norm formula only.
inline double mean_min_pnorm(const lab::Matrix& from, const lab::Matrix& to, double p) {
    if (from.rows() == 0 || to.rows() == 0 || from.cols() != to.cols()) return std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
    for (std::size_t i = 0; i < from.rows(); ++i) {
        std::vector<double> dists;
        for (std::size_t j = 0; j < to.rows(); ++j) {
            double acc = 0.0;
            for (std::size_t m = 0; m < from.cols(); ++m) acc += std::pow(std::abs(from(i, m) - to(j, m)), p);
            dists.push_back(std::pow(acc, 1.0 / p));
        }
        total += *std::min_element(dists.begin(), dists.end());
    }
    return total / static_cast<double>(from.rows());
}

inline double igd(const lab::Matrix& approx, const lab::Matrix& ref, double p) {
    return mean_min_pnorm(ref, approx, p);
}

inline lab::Matrix random_matrix(lab::Rng& rng, std::size_t rows, std::size_t cols, double lo = 0.0, double hi = 1.0) {
    lab::Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = rng.uniform(lo, hi);
    }
    return m;
}

/// Average 1-based ranks computed by counting, O(n²).
inline std::vector<double> count_ranks(const std::vector<double>& v) {
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double below = 0.0;
        double equal = 0.0;
        for (double w : v) {
            if (w < v[i]) below += 1.0;
            if (w == v[i]) equal += 1.0;
        }
        ranks[i] = below + (equal + 1.0) / 2.0;
    }
    return ranks;
}

/// Two-sided exact signed-rank p-value by enumerating all 2^n sign vectors.
inline double wilcoxon_enumeration_p(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> d;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] - b[i] != 0.0) d.push_back(a[i] - b[i]);
    }
    if (d.empty()) return 1.0;
    std::vector<double> mag;
    for (double x : d) mag.push_back(std::abs(x));
    auto ranks = count_ranks(mag);
    double total = std::accumulate(ranks.begin(), ranks.end(), 0.0);
    double w_plus = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] > 0) w_plus += ranks[i];
    }
    const double w = std::min(w_plus, total - w_plus);
    const std::uint64_t n_assign = std::uint64_t{1} << d.size();
    std::uint64_t extreme = 0;
    for (std::uint64_t mask = 0; mask < n_assign; ++mask) {
        double t = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (mask & (std::uint64_t{1} << i)) t += ranks[i];
        }
        if (std::min(t, total - t) <= w + 1e-9) ++extreme;
    }
    return std::min(1.0, static_cast<double>(extreme) / static_cast<double>(n_assign));
}

/// Friedman statistic in its rank-sum form 12/(nk(k+1))·ΣR_j² − 3n(k+1),
/// lower values ranked first.
inline double friedman_statistic(const std::vector<std::vector<double>>& rows) {
    const double n = static_cast<double>(rows.size());
    const double k = static_cast<double>(rows.front().size());
    std::vector<double> sums(rows.front().size(), 0.0);
    for (const auto& row : rows) {
        auto r = count_ranks(row);
        for (std::size_t j = 0; j < r.size(); ++j) sums[j] += r[j];
    }
    double sq = 0.0;
    for (double s : sums) sq += s * s;
    return 12.0 / (n * k * (k + 1.0)) * sq - 3.0 * n * (k + 1.0);
}

/// Chi-square upper tail for integer df by the closed-form recurrence
/// Q(x; ν+2) = Q(x; ν) + (x/2)^(ν/2) e^(−x/2) / Γ(ν/2 + 1), in long double.
inline long double chi_square_sf(long double x, unsigned df) {
    if (x <= 0) return 1.0L;
    const long double h = x / 2.0L;
    long double q = (df % 2 == 0) ? std::exp(-h) : std::erfc(std::sqrt(h));
    for (unsigned nu = (df % 2 == 0) ? 2u : 1u; nu < df; nu += 2) {
        const long double half = static_cast<long double>(nu) / 2.0L;
        q += std::exp(half * std::log(h) - h - std::lgamma(half + 1.0L));
    }
    return q;
}

struct Choice {
    std::size_t index;
    double score;
};

/// Literal weighted-sum procedure: min-max normalize, weight, pick the first minimum.
inline Choice weighted_sum(const lab::Matrix& F, std::vector<double> w) {
    const std::size_t n = F.rows();
    const std::size_t m = F.cols();
    if (w.empty()) w.assign(m, 1.0);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= total;
    Choice best{0, std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            double lo = F(0, j);
            double hi = F(0, j);
            for (std::size_t r = 0; r < n; ++r) {
                lo = std::min(lo, F(r, j));
                hi = std::max(hi, F(r, j));
            }
            const double z = hi > lo ? (F(i, j) - lo) / (hi - lo) : 0.0;
            s += w[j] * z;
        }
        if (s < best.score) best = {i, s};
    }
    return best;
}

/// Literal TOPSIS: min-max normalize, weight, ideal = 0, anti-ideal = column max.
inline Choice topsis(const lab::Matrix& F, std::vector<double> w) {
    const std::size_t n = F.rows();
    const std::size_t m = F.cols();
    if (w.empty()) w.assign(m, 1.0);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= total;
    std::vector<std::vector<double>> v(n, std::vector<double>(m));
    for (std::size_t j = 0; j < m; ++j) {
        double lo = F(0, j);
        double hi = F(0, j);
        for (std::size_t r = 0; r < n; ++r) {
            lo = std::min(lo, F(r, j));
            hi = std::max(hi, F(r, j));
        }
        for (std::size_t r = 0; r < n; ++r) v[r][j] = w[j] * (hi > lo ? (F(r, j) - lo) / (hi - lo) : 0.0);
    }
    std::vector<double> anti(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t r = 0; r < n; ++r) anti[j] = std::max(anti[j], v[r][j]);
    }
    Choice best{0, -1.0};
    for (std::size_t i = 0; i < n; ++i) {
        double dp = 0.0;
        double dm = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            dp += v[i][j] * v[i][j];
            dm += (v[i][j] - anti[j]) * (v[i][j] - anti[j]);
        }
        dp = std::sqrt(dp);
        dm = std::sqrt(dm);
        const double c = dp + dm == 0.0 ? 0.0 : dm / (dp + dm);
        if (c > best.score) best = {i, c};
    }
    return best;
}

}  // namespace oracle
