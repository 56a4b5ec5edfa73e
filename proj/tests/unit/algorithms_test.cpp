#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "lab/algorithms/config.hpp"
#include "lab/algorithms/engine.hpp"
#include "lab/algorithms/moead.hpp"
#include "lab/algorithms/nsga2.hpp"
#include "lab/algorithms/operators.hpp"
#include "lab/algorithms/sorting.hpp"
#include "lab/algorithms/weights.hpp"
#include "lab/benchmarks.hpp"
#include "lab/errors.hpp"
#include "oracles.hpp"

using lab::Matrix;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST(Sorting, Examples) {
    EXPECT_EQ(lab::fast_nondominated_sort(Matrix::from_rows({{0, 0}, {1, 1}, {0, 2}})),
              (std::vector<std::size_t>{0, 1, 1}));
    EXPECT_EQ(lab::fast_nondominated_sort(Matrix::from_rows({{2, 2}, {2, 2}, {2, 2}})),
              (std::vector<std::size_t>{0, 0, 0}));
    EXPECT_EQ(lab::fast_nondominated_sort(Matrix::from_rows({{0, 0}, {1, 1}, {2, 2}})),
              (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Sorting, AgreesWithPeelOracle) {
    lab::Rng rng(21);
    for (int trial = 0; trial < 80; ++trial) {
        const std::size_t n = 1 + rng.below(200);
        const std::size_t m = 2 + rng.below(4);
        Matrix F(n, m);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < m; ++c) F(r, c) = static_cast<double>(rng.below(10));
        }
        ASSERT_EQ(lab::fast_nondominated_sort(F), oracle::peel_ranks(F));
    }
}

TEST(Sorting, InfeasibleRowsRankBehindFeasibleOnes) {
    Matrix F = Matrix::from_rows({{0, 0}, {5, 5}, {1, 1}});
    std::vector<double> violation{0.5, 0.0, 0.2};
    EXPECT_EQ(lab::fast_nondominated_sort(F, violation), (std::vector<std::size_t>{2, 0, 1}));
}

TEST(Crowding, Examples) {
    auto three = lab::crowding_distance(Matrix::from_rows({{0, 2}, {1, 1}, {2, 0}}));
    EXPECT_EQ(three[0], kInf);
    EXPECT_DOUBLE_EQ(three[1], 2.0);
    EXPECT_EQ(three[2], kInf);
    auto two = lab::crowding_distance(Matrix::from_rows({{0, 1}, {1, 0}}));
    EXPECT_EQ(two[0], kInf);
    EXPECT_EQ(two[1], kInf);
    auto same = lab::crowding_distance(Matrix::from_rows({{1, 1}, {1, 1}, {1, 1}, {1, 1}}));
    std::size_t infinite = 0;
    for (double d : same) {
        if (d == kInf) ++infinite;
        else EXPECT_EQ(d, 0.0);
    }
    EXPECT_GE(infinite, 1u);
}

TEST(Operators, SbxNoOpAndIdenticalParents) {
    std::vector<double> lo(4, 0.0), hi(4, 1.0);
    std::vector<double> a{0.1, 0.2, 0.3, 0.4}, b{0.9, 0.8, 0.7, 0.6};
    lab::Rng rng(1);
    auto [c1, c2] = lab::sbx_crossover(a, b, 15.0, 0.0, rng, {lo, hi});
    EXPECT_EQ(c1, a);
    EXPECT_EQ(c2, b);
    auto [d1, d2] = lab::sbx_crossover(a, a, 15.0, 1.0, rng, {lo, hi});
    EXPECT_EQ(d1, a);
    EXPECT_EQ(d2, a);
}

TEST(Operators, SbxPreservesParentMeanAndBounds) {
    std::vector<double> lo(1, 0.0), hi(1, 1.0);
    std::vector<double> a{0.3}, b{0.6};
    lab::Rng rng(2);
    double sum = 0.0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        auto [c1, c2] = lab::sbx_crossover(a, b, 15.0, 1.0, rng, {lo, hi});
        ASSERT_GE(c1[0], 0.0);
        ASSERT_LE(c1[0], 1.0);
        ASSERT_GE(c2[0], 0.0);
        ASSERT_LE(c2[0], 1.0);
        sum += (c1[0] + c2[0]) / 2.0;
    }
    EXPECT_NEAR(sum / draws, 0.45, 1e-2);
}

TEST(Operators, PolynomialMutation) {
    std::vector<double> lo(3, 0.0), hi(3, 1.0);
    std::vector<double> x{0.2, 0.5, 0.8};
    lab::Rng rng(3);
    EXPECT_EQ(lab::polynomial_mutation(x, 20.0, 0.0, rng, {lo, hi}), x);
    std::vector<double> at_lower{0.0, 0.0, 0.0};
    for (int i = 0; i < 1000; ++i) {
        for (double y : lab::polynomial_mutation(at_lower, 20.0, 1.0, rng, {lo, hi})) ASSERT_GE(y, 0.0);
    }
    std::vector<double> mid{0.5};
    double sum = 0.0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) sum += lab::polynomial_mutation(mid, 20.0, 1.0, rng, {lo, hi})[0] - 0.5;
    EXPECT_NEAR(sum / draws, 0.0, 1e-2);
}

TEST(Weights, DasDennis) {
    auto w = lab::das_dennis_weights(2, 4);
    ASSERT_EQ(w.rows(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_DOUBLE_EQ(w(i, 0), 0.25 * static_cast<double>(i));
        EXPECT_DOUBLE_EQ(w(i, 1), 1.0 - 0.25 * static_cast<double>(i));
    }
    auto corners = lab::das_dennis_weights(3, 1);
    ASSERT_EQ(corners.rows(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < 3; ++j) s += corners(i, j);
        EXPECT_DOUBLE_EQ(s, 1.0);
    }
    EXPECT_EQ(lab::das_dennis_weights(3, 12).rows(), 91u);
    EXPECT_EQ(lab::lattice_size(3, 12), 91u);
}

TEST(Weights, EnumerationOracle) {
    // Every (i, j, k) with i + j + k = 6, in lexicographic order.
    auto w = lab::das_dennis_weights(3, 6);
    std::size_t row = 0;
    for (int i = 0; i <= 6; ++i) {
        for (int j = 0; i + j <= 6; ++j) {
            ASSERT_LT(row, w.rows());
            EXPECT_NEAR(w(row, 0), i / 6.0, 1e-15);
            EXPECT_NEAR(w(row, 1), j / 6.0, 1e-15);
            EXPECT_NEAR(w(row, 2), (6 - i - j) / 6.0, 1e-15);
            ++row;
        }
    }
    EXPECT_EQ(row, w.rows());
}

TEST(Weights, Tchebycheff) {
    std::vector<double> f{1, 2}, z{0, 0};
    EXPECT_DOUBLE_EQ(lab::tchebycheff(f, std::vector<double>{1, 1}, z), 2.0);
    EXPECT_DOUBLE_EQ(lab::tchebycheff(z, std::vector<double>{0.3, 0.7}, z), 0.0);
    std::vector<double> g{5, 0.5};
    EXPECT_DOUBLE_EQ(lab::tchebycheff(g, std::vector<double>{0, 1}, z), std::max(1e-6 * 5, 0.5));
}

TEST(Config, Defaults) {
    auto n = lab::AlgorithmConfig::defaults(lab::AlgorithmId::nsga2);
    EXPECT_EQ(n.pop_size, 100u);
    EXPECT_DOUBLE_EQ(n.crossover_prob, 0.9);
    EXPECT_DOUBLE_EQ(n.crossover_eta, 15.0);
    EXPECT_DOUBLE_EQ(n.mutation_eta, 20.0);
    EXPECT_DOUBLE_EQ(n.mutation_probability(30), 1.0 / 30.0);
    auto m = lab::AlgorithmConfig::defaults(lab::AlgorithmId::moead);
    EXPECT_EQ(m.moead_neighborhood, 20u);
    EXPECT_EQ(m.moead_max_replacements, 2u);
    EXPECT_DOUBLE_EQ(m.moead_delta, 0.9);
}

TEST(Config, Validation) {
    auto odd = lab::AlgorithmConfig::defaults(lab::AlgorithmId::nsga2);
    odd.pop_size = 51;
    EXPECT_THROW(odd.validate(), lab::ConfigurationError);
    EXPECT_THROW(lab::algorithm_config_from_json({{"algorithm_id", "nsga2"}, {"bogus", 1}}), lab::ConfigurationError);
    EXPECT_THROW(lab::algorithm_config_from_json({{"algorithm_id", "nsga2"}, {"crossover_prob", 1.5}}),
                 lab::ConfigurationError);
    auto back = lab::algorithm_config_from_json(lab::to_json(lab::AlgorithmConfig::defaults(lab::AlgorithmId::moead)));
    EXPECT_EQ(back, lab::AlgorithmConfig::defaults(lab::AlgorithmId::moead));
}

TEST(Config, MoeadPopulationIsLatticeSize) {
    auto problem = lab::make_benchmark("dtlz2", 3);
    auto cfg = lab::AlgorithmConfig::defaults(lab::AlgorithmId::moead);
    cfg.pop_size = 100;
    auto resolved = lab::resolve_config(cfg, *problem);
    EXPECT_EQ(resolved.pop_size, 105u);  // 13 partitions: C(15, 2) = 105
    EXPECT_EQ(resolved.pop_size, lab::lattice_size(3, lab::partitions_for_at_least(3, 100)));
}

TEST(Nsga2, StepAccountsBudgetAndIsDeterministic) {
    auto problem = lab::make_benchmark("zdt1");
    auto cfg = lab::resolve_config(lab::AlgorithmConfig::defaults(lab::AlgorithmId::nsga2), *problem);
    auto run = [&] {
        lab::Rng rng(42);
        auto state = lab::nsga2_initialize(*problem, cfg, 10000, rng);
        EXPECT_EQ(state.fe_used, 100u);
        state = lab::nsga2_step(std::move(state), cfg, *problem, rng);
        EXPECT_EQ(state.fe_used, 200u);
        return state;
    };
    auto a = run();
    auto b = run();
    EXPECT_EQ(a.population.X, b.population.X);
    EXPECT_EQ(a.population.batch.F, b.population.batch.F);
}

TEST(Nsga2, ExhaustedBudgetIsANoOp) {
    auto problem = lab::make_benchmark("zdt1");
    auto cfg = lab::resolve_config(lab::AlgorithmConfig::defaults(lab::AlgorithmId::nsga2), *problem);
    lab::Rng rng(1);
    auto state = lab::nsga2_initialize(*problem, cfg, 100, rng);
    auto next = lab::nsga2_step(state, cfg, *problem, rng);
    EXPECT_TRUE(next.finished);
    EXPECT_EQ(next.fe_used, 100u);
}

TEST(Nsga2, SurvivorsAreNeverDominatedByDiscardedRankZero) {
    auto problem = lab::make_benchmark("zdt1");
    auto cfg = lab::resolve_config(lab::AlgorithmConfig::defaults(lab::AlgorithmId::nsga2), *problem);
    lab::Rng rng(8);
    auto state = lab::nsga2_initialize(*problem, cfg, 3000, rng);
    while (!state.finished) {
        lab::Nsga2Trace trace;
        state = lab::nsga2_step(std::move(state), cfg, *problem, rng, &trace);
        if (trace.survivors.empty()) break;
        std::vector<bool> kept(trace.merged_F.rows(), false);
        for (auto s : trace.survivors) kept[s] = true;
        for (std::size_t d = 0; d < kept.size(); ++d) {
            if (kept[d] || trace.merged_rank[d] != 0) continue;
            for (auto s : trace.survivors) {
                ASSERT_FALSE(oracle::dominates(trace.merged_F.row(d), trace.merged_F.row(s)));
            }
        }
    }
}

TEST(Moead, StepAccountingIdealPointAndReplacementCap) {
    auto base = lab::make_benchmark("zdt1");
    std::vector<double> seen_min(2, std::numeric_limits<double>::infinity());
    lab::ProblemInstance spy = *base;
    spy.evaluator = [&, inner = base->evaluator](const Matrix& X) {
        auto out = inner(X);
        for (std::size_t r = 0; r < out.F.rows(); ++r) {
            for (std::size_t m = 0; m < 2; ++m) seen_min[m] = std::min(seen_min[m], out.F(r, m));
        }
        return out;
    };
    auto cfg = lab::resolve_config(lab::AlgorithmConfig::defaults(lab::AlgorithmId::moead), spy);
    EXPECT_EQ(cfg.pop_size, 100u);
    lab::Rng rng(4);
    auto state = lab::moead_initialize(spy, cfg, 2000, rng);
    EXPECT_EQ(state.ideal_point, seen_min);
    while (!state.finished) {
        const auto before = state.fe_used;
        const auto ideal_before = state.ideal_point;
        lab::MoeadTrace trace;
        state = lab::moead_step(std::move(state), cfg, spy, rng, &trace);
        if (state.fe_used == before) break;
        EXPECT_EQ(state.fe_used - before, 100u);
        for (auto r : trace.replacements_per_child) EXPECT_LE(r, 2u);
        for (std::size_t m = 0; m < 2; ++m) EXPECT_LE(state.ideal_point[m], ideal_before[m]);
        EXPECT_EQ(state.ideal_point, seen_min);
    }
    EXPECT_EQ(state.fe_used, 2000u);
}

TEST(Moead, StopsAtTheSubproblemWhereBudgetRunsOut) {
    auto problem = lab::make_benchmark("zdt1");
    auto cfg = lab::resolve_config(lab::AlgorithmConfig::defaults(lab::AlgorithmId::moead), *problem);
    lab::Rng rng(4);
    auto state = lab::moead_initialize(*problem, cfg, 150, rng);
    state = lab::moead_step(std::move(state), cfg, *problem, rng);
    EXPECT_EQ(state.fe_used, 150u);
    EXPECT_TRUE(state.finished);
}
