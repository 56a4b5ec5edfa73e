#include "lab/algorithms/sorting.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "lab/dominance.hpp"

namespace lab {

std::vector<std::size_t> fast_nondominated_sort(const Matrix& F, std::span<const double> violations) {
    const std::size_t n = F.rows();
    const bool constrained = !violations.empty();
    auto better = [&](std::size_t a, std::size_t b) {
        if (!constrained) return dominates(F.row(a), F.row(b));
        return constrained_dominates({F.row(a), violations[a]}, {F.row(b), violations[b]});
    };

    std::vector<std::vector<std::size_t>> dominated_by(n);
    std::vector<std::size_t> domination_count(n, 0);
    std::vector<std::size_t> rank(n, 0);
    std::vector<std::size_t> current;

    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            if (better(p, q)) {
                dominated_by[p].push_back(q);
                ++domination_count[q];
            } else if (better(q, p)) {
                dominated_by[q].push_back(p);
                ++domination_count[p];
            }
        }
    }
    for (std::size_t p = 0; p < n; ++p) {
        if (domination_count[p] == 0) current.push_back(p);
    }

    std::size_t level = 0;
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t p : current) {
            rank[p] = level;
            for (std::size_t q : dominated_by[p]) {
                if (--domination_count[q] == 0) next.push_back(q);
            }
        }
        ++level;
        current = std::move(next);
    }
    return rank;
}

std::vector<std::vector<std::size_t>> fronts_from_ranks(std::span<const std::size_t> ranks) {
    std::vector<std::vector<std::size_t>> fronts;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        if (ranks[i] >= fronts.size()) fronts.resize(ranks[i] + 1);
        fronts[ranks[i]].push_back(i);
    }
    return fronts;
}

std::vector<double> crowding_distance(const Matrix& F) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::size_t k = F.rows();
    std::vector<double> distance(k, 0.0);
    if (k <= 2) {
        std::fill(distance.begin(), distance.end(), inf);
        return distance;
    }

    std::vector<std::size_t> order(k);
    for (std::size_t m = 0; m < F.cols(); ++m) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return F(a, m) < F(b, m); });
        distance[order.front()] = inf;
        distance[order.back()] = inf;
        const double range = F(order.back(), m) - F(order.front(), m);
        if (range <= 0.0) continue;
        for (std::size_t i = 1; i + 1 < k; ++i) {
            distance[order[i]] += (F(order[i + 1], m) - F(order[i - 1], m)) / range;
        }
    }
    return distance;
}

}  // namespace lab
