#include "lab/algorithms/nsga2.hpp"

#include <algorithm>
#include <numeric>

#include "lab/algorithms/operators.hpp"
#include "lab/algorithms/sorting.hpp"
#include "lab/dominance.hpp"
#include "lab/errors.hpp"

namespace lab {

namespace {

Matrix random_population(const ProblemInstance& problem, std::size_t n, Rng& rng) {
    Matrix X(n, problem.n_var);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < problem.n_var; ++c) {
            X(r, c) = rng.uniform(problem.lower[c], problem.upper[c]);
        }
    }
    return X;
}

void assign_rank_and_crowding(Population& pop, bool constrained) {
    auto violations = constrained ? constraint_violations(pop.batch) : std::vector<double>{};
    pop.rank = fast_nondominated_sort(pop.batch.F, violations);
    pop.crowding.assign(pop.size(), 0.0);
    for (const auto& front : fronts_from_ranks(pop.rank)) {
        auto cd = crowding_distance(pop.batch.F.select_rows(front));
        for (std::size_t i = 0; i < front.size(); ++i) pop.crowding[front[i]] = cd[i];
    }
}

std::size_t binary_tournament(const Population& pop, Rng& rng) {
    std::size_t a = rng.below(pop.size());
    std::size_t b = rng.below(pop.size());
    if (pop.rank[a] != pop.rank[b]) return pop.rank[a] < pop.rank[b] ? a : b;
    if (pop.crowding[a] != pop.crowding[b]) return pop.crowding[a] > pop.crowding[b] ? a : b;
    return std::min(a, b);
}

}  // namespace

SurvivorSelection select_survivors(const ObjectiveBatch& merged, std::size_t n, bool constrained) {
    SurvivorSelection out;
    auto violations = constrained ? constraint_violations(merged) : std::vector<double>{};
    out.merged_rank = fast_nondominated_sort(merged.F, violations);

    for (const auto& front : fronts_from_ranks(out.merged_rank)) {
        if (out.indices.size() >= n) break;
        auto cd = crowding_distance(merged.F.select_rows(front));
        std::vector<std::size_t> order(front.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        const std::size_t room = n - out.indices.size();
        if (front.size() > room) {
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return cd[a] > cd[b]; });
            order.resize(room);
        }
        for (std::size_t k : order) {
            out.indices.push_back(front[k]);
            out.rank.push_back(out.merged_rank[front[k]]);
            out.crowding.push_back(cd[k]);
        }
    }
    return out;
}

RunState nsga2_initialize(const ProblemInstance& problem, const AlgorithmConfig& config,
                          std::size_t fe_budget, Rng& rng) {
    if (fe_budget < config.pop_size) {
        throw ConfigurationError("fe_budget must cover the initial population", "fe_budget");
    }
    RunState state;
    state.fe_budget = fe_budget;
    state.population.X = random_population(problem, config.pop_size, rng);
    state.population.batch = problem.evaluate(state.population.X);
    state.fe_used = config.pop_size;
    assign_rank_and_crowding(state.population, problem.constrained());
    state.finished = state.fe_used >= fe_budget;
    return state;
}

RunState nsga2_step(RunState state, const AlgorithmConfig& config, const ProblemInstance& problem,
                    Rng& rng, Nsga2Trace* trace) {
    if (state.finished || state.fe_used >= state.fe_budget) {
        state.finished = true;
        return state;
    }
    const Population& parents = state.population;
    const std::size_t n = parents.size();
    const std::size_t n_offspring = std::min(n, state.fe_budget - state.fe_used);
    const Bounds bounds{problem.lower, problem.upper};
    const double p_mut = config.mutation_probability(problem.n_var);

    Matrix offspring(0, problem.n_var);
    while (offspring.rows() < n_offspring) {
        const std::size_t a = binary_tournament(parents, rng);
        const std::size_t b = binary_tournament(parents, rng);
        auto [c1, c2] = sbx_crossover(parents.X.row(a), parents.X.row(b), config.crossover_eta,
                                      config.crossover_prob, rng, bounds);
        offspring.append_row(polynomial_mutation(c1, config.mutation_eta, p_mut, rng, bounds));
        if (offspring.rows() < n_offspring) {
            offspring.append_row(polynomial_mutation(c2, config.mutation_eta, p_mut, rng, bounds));
        }
    }

    ObjectiveBatch offspring_batch = problem.evaluate(offspring);
    state.fe_used += n_offspring;

    Matrix merged_X = parents.X;
    merged_X.append_rows(offspring);
    ObjectiveBatch merged = parents.batch;
    merged.append(offspring_batch);

    SurvivorSelection selected = select_survivors(merged, n, problem.constrained());
    if (trace) {
        trace->merged_F = merged.F;
        trace->merged_rank = selected.merged_rank;
        trace->survivors = selected.indices;
    }

    Population next;
    next.X = merged_X.select_rows(selected.indices);
    next.batch = merged.select_rows(selected.indices);
    next.rank = std::move(selected.rank);
    next.crowding = std::move(selected.crowding);
    state.population = std::move(next);
    ++state.generation;
    state.finished = state.fe_used >= state.fe_budget;
    return state;
}

}  // namespace lab
