#include "lab/algorithms/moead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lab/algorithms/operators.hpp"
#include "lab/algorithms/weights.hpp"
#include "lab/dominance.hpp"
#include "lab/errors.hpp"

namespace lab {

namespace {

std::vector<std::vector<std::size_t>> nearest_neighbors(const Matrix& weights, std::size_t t) {
    const std::size_t w = weights.rows();
    std::vector<std::vector<std::size_t>> out(w);
    std::vector<double> dist(w);
    for (std::size_t i = 0; i < w; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
            double s = 0.0;
            for (std::size_t m = 0; m < weights.cols(); ++m) {
                double d = weights(i, m) - weights(j, m);
                s += d * d;
            }
            dist[j] = s;
        }
        std::vector<std::size_t> order(w);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
        order.resize(t);
        out[i] = std::move(order);
    }
    return out;
}

}  // namespace

RunState moead_initialize(const ProblemInstance& problem, const AlgorithmConfig& config,
                          std::size_t fe_budget, Rng& rng) {
    if (problem.n_obj < 2) throw ConfigurationError("moead needs at least two objectives", "M");
    RunState state;
    state.fe_budget = fe_budget;
    auto& ctx = state.decomposition;
    ctx.partitions = partitions_for_at_least(problem.n_obj, config.pop_size);
    ctx.weights = das_dennis_weights(problem.n_obj, ctx.partitions);
    const std::size_t w = ctx.weights.rows();
    if (fe_budget < w) throw ConfigurationError("fe_budget must cover the initial population", "fe_budget");
    ctx.neighbors = nearest_neighbors(ctx.weights, std::min(config.moead_neighborhood, w));

    Matrix X(w, problem.n_var);
    for (std::size_t r = 0; r < w; ++r) {
        for (std::size_t c = 0; c < problem.n_var; ++c) {
            X(r, c) = rng.uniform(problem.lower[c], problem.upper[c]);
        }
    }
    state.population.X = std::move(X);
    state.population.batch = problem.evaluate(state.population.X);
    state.fe_used = w;

    state.ideal_point.assign(problem.n_obj, std::numeric_limits<double>::infinity());
    const Matrix& F = state.population.batch.F;
    for (std::size_t r = 0; r < F.rows(); ++r) {
        for (std::size_t m = 0; m < F.cols(); ++m) {
            state.ideal_point[m] = std::min(state.ideal_point[m], F(r, m));
        }
    }
    state.finished = state.fe_used >= fe_budget;
    return state;
}

RunState moead_step(RunState state, const AlgorithmConfig& config, const ProblemInstance& problem,
                    Rng& rng, MoeadTrace* trace) {
    if (state.finished || state.fe_used >= state.fe_budget) {
        state.finished = true;
        return state;
    }
    const auto& ctx = state.decomposition;
    auto& pop = state.population;
    const std::size_t w = pop.size();
    const Bounds bounds{problem.lower, problem.upper};
    const double p_mut = config.mutation_probability(problem.n_var);
    const bool constrained = problem.constrained();

    std::vector<double> violation =
        constrained ? constraint_violations(pop.batch) : std::vector<double>(w, 0.0);
    std::vector<std::size_t> everyone(w);
    std::iota(everyone.begin(), everyone.end(), std::size_t{0});

    for (std::size_t i = 0; i < w; ++i) {
        if (state.fe_used >= state.fe_budget) break;

        const bool local = rng.uniform() < config.moead_delta;
        std::vector<std::size_t> pool = local ? ctx.neighbors[i] : everyone;

        const std::size_t a = pool[rng.below(pool.size())];
        std::size_t b = pool[rng.below(pool.size())];
        while (b == a && pool.size() > 1) b = pool[rng.below(pool.size())];

        auto children = sbx_crossover(pop.X.row(a), pop.X.row(b), config.crossover_eta,
                                      config.crossover_prob, rng, bounds);
        auto child = polynomial_mutation(children.first, config.mutation_eta, p_mut, rng, bounds);
        Matrix child_X = Matrix::row_vector(child);
        ObjectiveBatch child_batch = problem.evaluate(child_X);
        ++state.fe_used;

        auto f_child = child_batch.F.row(0);
        for (std::size_t m = 0; m < f_child.size(); ++m) {
            state.ideal_point[m] = std::min(state.ideal_point[m], f_child[m]);
        }
        const double child_violation = constrained ? constraint_violations(child_batch)[0] : 0.0;

        rng.shuffle(std::span<std::size_t>(pool));
        std::size_t replaced = 0;
        for (std::size_t j : pool) {
            if (replaced >= config.moead_max_replacements) break;
            bool better = false;
            if (child_violation != violation[j]) {
                better = child_violation < violation[j];
            } else {
                auto lambda = ctx.weights.row(j);
                better = tchebycheff(f_child, lambda, state.ideal_point) <
                         tchebycheff(pop.batch.F.row(j), lambda, state.ideal_point);
            }
            if (!better) continue;
            std::copy(child.begin(), child.end(), pop.X.row(j).begin());
            auto copy_row = [j](const Matrix& src, Matrix& dst) {
                if (src.cols() > 0) std::copy(src.row(0).begin(), src.row(0).end(), dst.row(j).begin());
            };
            copy_row(child_batch.F, pop.batch.F);
            copy_row(child_batch.G, pop.batch.G);
            copy_row(child_batch.H, pop.batch.H);
            violation[j] = child_violation;
            ++replaced;
        }
        if (trace) trace->replacements_per_child.push_back(replaced);
    }
    ++state.generation;
    state.finished = state.fe_used >= state.fe_budget;
    return state;
}

}  // namespace lab
