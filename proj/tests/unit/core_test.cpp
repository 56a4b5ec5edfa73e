#include <gtest/gtest.h>

#include <cmath>

#include "lab/benchmarks.hpp"
#include "lab/dominance.hpp"
#include "lab/errors.hpp"
#include "lab/json_util.hpp"
#include "lab/registry.hpp"
#include "lab/rng.hpp"
#include "oracles.hpp"

using lab::Matrix;

namespace {

std::vector<double> v(std::initializer_list<double> x) { return x; }

}  // namespace

TEST(Dominance, Examples) {
    EXPECT_TRUE(lab::dominates(v({0, 0}), v({1, 1})));
    EXPECT_FALSE(lab::dominates(v({0, 0}), v({0, 0})));
    EXPECT_FALSE(lab::dominates(v({1, 0}), v({0, 1})));
    EXPECT_FALSE(lab::dominates(v({0, 1}), v({1, 0})));
    EXPECT_THROW(lab::dominates(v({0, 0}), v({0, 0, 0})), lab::ContractViolation);
}

TEST(Dominance, AgreesWithOracleAndIsAntisymmetricAndTransitive) {
    lab::Rng rng(7);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t m = 1 + rng.below(4);
        // Coarse values so that ties and dominance both occur often.
        auto pick = [&] {
            std::vector<double> x(m);
            for (auto& e : x) e = static_cast<double>(rng.below(3));
            return x;
        };
        auto a = pick(), b = pick(), c = pick();
        EXPECT_EQ(lab::dominates(a, b), oracle::dominates(a, b));
        EXPECT_FALSE(lab::dominates(a, b) && lab::dominates(b, a));
        if (lab::dominates(a, b) && lab::dominates(b, c)) EXPECT_TRUE(lab::dominates(a, c));
    }
}

TEST(ConstrainedDominance, Examples) {
    auto f1 = v({5, 5}), f2 = v({0, 0});
    EXPECT_TRUE(lab::constrained_dominates({f1, 0.0}, {f2, 0.3}));
    EXPECT_FALSE(lab::constrained_dominates({f2, 0.3}, {f1, 0.0}));
    EXPECT_TRUE(lab::constrained_dominates({f1, 0.2}, {f2, 0.5}));
    auto a = v({0, 1}), b = v({1, 0});
    EXPECT_FALSE(lab::constrained_dominates({a, 0.0}, {b, 0.0}));
}

TEST(ConstrainedDominance, ViolationSumsPositivePartsAndEqualityExcess) {
    EXPECT_DOUBLE_EQ(lab::constraint_violation(v({-1.0, 0.5}), v({})), 0.5);
    EXPECT_DOUBLE_EQ(lab::constraint_violation(v({}), v({5e-5})), 0.0);
    EXPECT_NEAR(lab::constraint_violation(v({0.1}), v({-0.3})), 0.1 + 0.3 - 1e-4, 1e-15);
}

TEST(NondominatedFilter, Examples) {
    EXPECT_EQ(lab::nondominated_filter(Matrix::from_rows({{0, 0}, {1, 1}, {0, 2}})), (std::vector<std::size_t>{0}));
    EXPECT_EQ(lab::nondominated_filter(Matrix::from_rows({{1, 0}, {0, 1}})), (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(lab::nondominated_filter(Matrix::from_rows({{3, 3}})), (std::vector<std::size_t>{0}));
    EXPECT_TRUE(lab::nondominated_filter(Matrix(0, 2)).empty());
    EXPECT_EQ(lab::nondominated_filter(Matrix::from_rows({{1, 1}, {1, 1}})), (std::vector<std::size_t>{0, 1}));
}

TEST(NondominatedFilter, MatchesQuadraticOracle) {
    lab::Rng rng(11);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 1 + rng.below(200);
        const std::size_t m = 2 + rng.below(3);
        Matrix F(n, m);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < m; ++c) F(r, c) = static_cast<double>(rng.below(20));
        }
        auto kept = lab::nondominated_filter(F);
        ASSERT_EQ(kept, oracle::nondominated(F));
        for (std::size_t r = 0; r < n; ++r) {
            if (std::binary_search(kept.begin(), kept.end(), r)) continue;
            bool covered = false;
            for (std::size_t k : kept) covered = covered || oracle::dominates(F.row(k), F.row(r));
            EXPECT_TRUE(covered) << "row " << r;
        }
    }
}

TEST(Benchmarks, Zdt1Examples) {
    Matrix X(3, 30, 0.0);
    X(0, 0) = 0.25;
    for (std::size_t c = 1; c < 30; ++c) X(2, c) = 1.0;
    auto out = lab::evaluate_zdt1(X);
    EXPECT_DOUBLE_EQ(out.F(0, 0), 0.25);
    EXPECT_DOUBLE_EQ(out.F(0, 1), 0.5);
    EXPECT_DOUBLE_EQ(out.F(1, 0), 0.0);
    EXPECT_DOUBLE_EQ(out.F(1, 1), 1.0);
    EXPECT_DOUBLE_EQ(out.F(2, 0), 0.0);
    EXPECT_DOUBLE_EQ(out.F(2, 1), 10.0);
    EXPECT_EQ(out.G.cols(), 0u);
}

TEST(Benchmarks, OutOfBoundsRowsAreRejected) {
    Matrix X(1, 30, 0.0);
    X(0, 3) = 1.5;
    EXPECT_THROW(lab::evaluate_zdt1(X), lab::ContractViolation);
}

TEST(Benchmarks, AnalyticalFrontSampling) {
    auto three = lab::analytical_front("zdt1", 3);
    ASSERT_EQ(three.F.rows(), 3u);
    EXPECT_DOUBLE_EQ(three.F(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(three.F(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(three.F(1, 0), 0.5);
    EXPECT_NEAR(three.F(1, 1), 1.0 - std::sqrt(0.5), 1e-15);
    EXPECT_DOUBLE_EQ(three.F(2, 0), 1.0);
    EXPECT_DOUBLE_EQ(three.F(2, 1), 0.0);

    auto one = lab::analytical_front("zdt1", 1);
    ASSERT_EQ(one.F.rows(), 1u);
    EXPECT_DOUBLE_EQ(one.F(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(one.F(0, 1), 1.0);

    EXPECT_THROW(lab::analytical_front("unknown", 10), lab::UnsupportedError);
}

TEST(Benchmarks, OptimalSetsLandOnAnalyticalFronts) {
    lab::Rng rng(3);
    for (const char* id : {"zdt1", "zdt2", "zdt4"}) {
        auto problem = lab::make_benchmark(id);
        Matrix X(50, problem->n_var, 0.0);
        for (std::size_t r = 0; r < X.rows(); ++r) X(r, 0) = rng.uniform();
        auto out = problem->evaluate(X);
        for (std::size_t r = 0; r < X.rows(); ++r) {
            const double f1 = out.F(r, 0);
            const double expected = std::string(id) == "zdt2" ? 1.0 - f1 * f1 : 1.0 - std::sqrt(f1);
            EXPECT_NEAR(out.F(r, 1), expected, 1e-12) << id;
        }
    }
    auto front = lab::analytical_front("zdt1", lab::kReferenceFrontPoints);
    EXPECT_EQ(lab::nondominated_filter(front.F).size(), front.F.rows());
}

TEST(Benchmarks, Dtlz2OptimaLieOnUnitSphere) {
    lab::Rng rng(5);
    auto problem = lab::make_benchmark("dtlz2", 3);
    Matrix X(40, problem->n_var, 0.5);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        X(r, 0) = rng.uniform();
        X(r, 1) = rng.uniform();
    }
    auto out = problem->evaluate(X);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        double s = 0.0;
        for (std::size_t m = 0; m < 3; ++m) s += out.F(r, m) * out.F(r, m);
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(Benchmarks, Dtlz1OptimaLieOnSimplex) {
    lab::Rng rng(6);
    auto problem = lab::make_benchmark("dtlz1", 3);
    Matrix X(40, problem->n_var, 0.5);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        X(r, 0) = rng.uniform();
        X(r, 1) = rng.uniform();
    }
    auto out = problem->evaluate(X);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        EXPECT_NEAR(out.F(r, 0) + out.F(r, 1) + out.F(r, 2), 0.5, 1e-12);
    }
}

TEST(Benchmarks, EvaluationIsPure) {
    lab::Rng rng(9);
    for (const auto& entry : lab::benchmark_catalog()) {
        auto problem = lab::make_benchmark(entry.id);
        Matrix X(20, problem->n_var);
        for (std::size_t r = 0; r < X.rows(); ++r) {
            for (std::size_t c = 0; c < X.cols(); ++c) X(r, c) = rng.uniform(problem->lower[c], problem->upper[c]);
        }
        auto a = problem->evaluate(X);
        auto b = problem->evaluate(X);
        EXPECT_EQ(a.F.data(), b.F.data()) << entry.id;
        EXPECT_EQ(a.F.rows(), 20u);
        EXPECT_EQ(a.F.cols(), problem->n_obj);
    }
}

TEST(Benchmarks, DefaultDimensions) {
    EXPECT_EQ(lab::make_benchmark("zdt1")->n_var, 30u);
    EXPECT_EQ(lab::make_benchmark("zdt3")->n_var, 30u);
    EXPECT_EQ(lab::make_benchmark("zdt4")->n_var, 10u);
    EXPECT_EQ(lab::make_benchmark("zdt6")->n_var, 10u);
    auto d = lab::make_benchmark("dtlz2", 3);
    EXPECT_EQ(d->n_obj, 3u);
    EXPECT_EQ(d->n_var, 7u);
}

TEST(Registry, VersionsStayResolvable) {
    lab::ProblemRegistry registry;
    auto base = *lab::make_benchmark("zdt1");
    auto v1 = registry.add("clone", base);
    auto changed = base;
    changed.name = "changed";
    auto v2 = registry.add("clone", changed);
    EXPECT_EQ(v1, "clone@v1");
    EXPECT_EQ(v2, "clone@v2");
    EXPECT_EQ(registry.resolve("clone@v1")->name, base.name);
    EXPECT_EQ(registry.resolve("clone")->name, "changed");
    EXPECT_TRUE(registry.contains("zdt4"));
    EXPECT_THROW(registry.resolve("nope"), lab::UnsupportedError);
}

TEST(Rng, StreamsAreReproducibleAndIndependentOfParentDraws) {
    lab::Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next(), b.next());
    lab::Rng parent(99);
    auto child_before = parent.split(4);
    parent.next();
    auto child_after = parent.split(4);
    EXPECT_EQ(child_before.next(), child_after.next());
    lab::Rng r(1);
    for (int i = 0; i < 1000; ++i) {
        double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(Json, CanonicalFormIsSortedAndNaNBecomesNull) {
    nlohmann::json j = {{"b", 1}, {"a", lab::number_to_json(std::nan(""))}};
    EXPECT_EQ(lab::canonical_dump(j), R"({"a":null,"b":1})");
    EXPECT_TRUE(std::isnan(lab::number_from_json(nullptr)));
    Matrix m = Matrix::from_rows({{0.1, 1e-300}, {3.0, -2.5}});
    EXPECT_EQ(lab::matrix_from_json(lab::matrix_to_json(m)), m);
}
