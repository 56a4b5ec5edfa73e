#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "lab/errors.hpp"
#include "lab/indicators.hpp"
#include "oracles.hpp"

using lab::Matrix;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

Matrix shuffled(const Matrix& m, lab::Rng& rng) {
    std::vector<std::size_t> idx(m.rows());
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(std::span<std::size_t>(idx));
    return m.select_rows(idx);
}

}  // namespace

TEST(Igd, Examples) {
    EXPECT_DOUBLE_EQ(lab::igd_pnorm(Matrix::from_rows({{3, 4}}), Matrix::from_rows({{0, 0}}), 2.0), 5.0);
    auto set = Matrix::from_rows({{0, 1}, {0.5, 0.5}, {1, 0}});
    EXPECT_EQ(lab::igd_pnorm(set, set, 2.0), 0.0);
    EXPECT_DOUBLE_EQ(lab::igd_pnorm(Matrix::from_rows({{0, 0}, {2, 2}}), Matrix::from_rows({{1, 1}}), 1.0), 2.0);
    EXPECT_TRUE(std::isnan(lab::igd_pnorm(Matrix::from_rows({{0, 0}}), Matrix::from_rows({{0, 0, 0}}), 2.0)));
    EXPECT_TRUE(std::isnan(lab::igd_pnorm(Matrix(0, 2), set.select_rows(std::vector<std::size_t>{0}), 2.0)));
    EXPECT_TRUE(std::isnan(lab::igd_pnorm(set, Matrix(0, 2), 2.0)));
}

TEST(Igd, ExponentIsClamped) {
    lab::Rng rng(1);
    auto a = oracle::random_matrix(rng, 7, 3);
    auto r = oracle::random_matrix(rng, 9, 3);
    EXPECT_EQ(lab::igd_pnorm(a, r, 200.0), lab::igd_pnorm(a, r, 100.0));
    EXPECT_EQ(lab::igd_pnorm(a, r, 0.5), lab::igd_pnorm(a, r, 1.0));
    EXPECT_EQ(lab::igd_pnorm(a, r, -3.0), lab::igd_pnorm(a, r, 1.0));
    EXPECT_EQ(lab::clamp_norm_exponent(kNaN), 1.0);
    EXPECT_EQ(lab::clamp_norm_exponent(std::numeric_limits<double>::infinity()), 100.0);
}

TEST(Igd, SpecialPathsMatchGenericPath) {
    lab::Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        auto a = oracle::random_matrix(rng, 1 + rng.below(20), 2 + rng.below(4));
        auto r = oracle::random_matrix(rng, 1 + rng.below(20), a.cols());
        for (double p : {1.0, 2.0}) {
            EXPECT_NEAR(lab::detail::mean_min_distance(r, a, p, lab::detail::NormPath::automatic),
                        lab::detail::mean_min_distance(r, a, p, lab::detail::NormPath::generic), 1e-12);
        }
    }
}

TEST(Igd, MatchesBruteForceOracle) {
    lab::Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        auto a = oracle::random_matrix(rng, 1 + rng.below(50), 1 + rng.below(5));
        auto r = oracle::random_matrix(rng, 1 + rng.below(50), a.cols());
        const double p = 1.0 + rng.uniform() * 5.0;
        EXPECT_NEAR(lab::igd_pnorm(a, r, p), oracle::igd(a, r, p), 1e-12);
    }
}

TEST(Igd, Properties) {
    lab::Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        auto a = oracle::random_matrix(rng, 2 + rng.below(20), 2);
        auto r = oracle::random_matrix(rng, 2 + rng.below(20), 2);
        const double base = lab::igd_pnorm(a, r, 2.0);
        EXPECT_GE(base, 0.0);
        auto bigger = a;
        bigger.append_rows(oracle::random_matrix(rng, 1, 2));
        EXPECT_LE(lab::igd_pnorm(bigger, r, 2.0), base);
        EXPECT_NEAR(lab::igd_pnorm(shuffled(a, rng), shuffled(r, rng), 2.0), base, 1e-12);
        EXPECT_LE(lab::igd_plus(a, r), lab::igd_pnorm(a, r, 2.0) + 1e-12);
        auto superset = a;
        superset.append_rows(r);
        EXPECT_EQ(lab::igd_pnorm(superset, r, 2.0), 0.0);
    }
}

TEST(Gd, Examples) {
    EXPECT_DOUBLE_EQ(lab::gd_pnorm(Matrix::from_rows({{0, 0}}), Matrix::from_rows({{3, 4}, {100, 100}}), 2.0), 5.0);
    auto ref = Matrix::from_rows({{0, 1}, {1, 0}, {0.5, 0.5}});
    EXPECT_EQ(lab::gd_pnorm(ref.select_rows(std::vector<std::size_t>{1, 2}), ref, 2.0), 0.0);
    EXPECT_TRUE(std::isnan(lab::gd_pnorm(Matrix(0, 2), ref, 2.0)));
}

TEST(IgdPlus, Examples) {
    auto r = Matrix::from_rows({{1, 1}});
    EXPECT_EQ(lab::igd_plus(Matrix::from_rows({{0, 0}}), r), 0.0);
    EXPECT_DOUBLE_EQ(lab::igd_plus(Matrix::from_rows({{2, 2}}), r), std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(lab::igd_plus(Matrix::from_rows({{0, 3}}), r), 2.0);
    EXPECT_TRUE(std::isnan(lab::igd_plus(Matrix::from_rows({{0, 3}}), Matrix::from_rows({{0, 0, 0}}))));
}

TEST(Hypervolume, Examples) {
    std::vector<double> ref3{3, 3};
    EXPECT_DOUBLE_EQ(lab::hypervolume(Matrix::from_rows({{1, 2}, {2, 1}}), ref3), 3.0);
    EXPECT_EQ(lab::hypervolume(Matrix(0, 2), ref3), 0.0);
    std::vector<double> ref1{1, 1};
    EXPECT_DOUBLE_EQ(lab::hypervolume(Matrix::from_rows({{0, 0}}), ref1), 1.0);
    EXPECT_EQ(lab::hypervolume(Matrix::from_rows({{2, 2}}), ref1), 0.0);
    std::vector<double> ref_bad{1, 1, 1};
    EXPECT_THROW(lab::hypervolume(Matrix::from_rows({{0, 0}}), ref_bad), lab::ContractViolation);
}

TEST(Hypervolume, ExactTwoDimensionalAgreesWithGridUnionOracle) {
    // Integer coordinates: count dominated unit cells of the grid.
    lab::Rng rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        Matrix F(1 + rng.below(12), 2);
        for (std::size_t r = 0; r < F.rows(); ++r) {
            F(r, 0) = static_cast<double>(rng.below(10));
            F(r, 1) = static_cast<double>(rng.below(10));
        }
        std::vector<double> ref{10, 10};
        double cells = 0.0;
        for (int x = 0; x < 10; ++x) {
            for (int y = 0; y < 10; ++y) {
                bool covered = false;
                for (std::size_t r = 0; r < F.rows(); ++r) covered = covered || (F(r, 0) <= x && F(r, 1) <= y);
                if (covered) cells += 1.0;
            }
        }
        EXPECT_DOUBLE_EQ(lab::hypervolume(F, ref), cells);
    }
}

TEST(Hypervolume, MonteCarloAgreesWithinThreeSigma) {
    lab::Rng rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        auto F = oracle::random_matrix(rng, 1 + rng.below(15), 2);
        std::vector<double> ref{1.1, 1.1};
        const double exact = lab::hypervolume(F, ref);
        std::vector<double> lo{1.1, 1.1};
        for (std::size_t r = 0; r < F.rows(); ++r) {
            lo[0] = std::min(lo[0], F(r, 0));
            lo[1] = std::min(lo[1], F(r, 1));
        }
        const double box = (ref[0] - lo[0]) * (ref[1] - lo[1]);
        const double q = exact / box;
        const double sigma = box * std::sqrt(q * (1 - q) / static_cast<double>(lab::kHypervolumeSamples));
        EXPECT_NEAR(lab::hypervolume_monte_carlo(F, ref), exact, 3 * sigma + 1e-12);
    }
}

TEST(Hypervolume, MonotoneUnderAddingPoints) {
    lab::Rng rng(7);
    std::vector<double> ref{1.1, 1.1};
    for (int trial = 0; trial < 50; ++trial) {
        auto F = oracle::random_matrix(rng, 1 + rng.below(10), 2);
        const double before = lab::hypervolume(F, ref);
        F.append_rows(oracle::random_matrix(rng, 1, 2));
        EXPECT_GE(lab::hypervolume(F, ref), before);
    }
}

TEST(MakeMetric, BindingBehaviors) {
    auto spec = lab::MetricSpec::make(lab::MetricId::igd, 2.0);
    auto unbound = lab::make_metric(spec, nlohmann::json::object());
    EXPECT_TRUE(std::isnan(unbound(Matrix::from_rows({{0, 1}}))));

    nlohmann::json context = {{"config", {{"pf", {{0.0, 0.0}}}}}};
    auto bound = lab::make_metric(spec, context);
    std::vector<double> point{3, 4};
    EXPECT_DOUBLE_EQ(bound(std::span<const double>(point)), 5.0);

    EXPECT_EQ(lab::make_metric(lab::MetricSpec::make(lab::MetricId::igd, 0.5), context).p(), 1.0);
    EXPECT_EQ(lab::MetricSpec::make(lab::MetricId::gd, 500.0).p, 100.0);
    EXPECT_THROW(lab::make_metric(lab::MetricSpec::make(lab::MetricId::hv), context), lab::ConfigurationError);
}

TEST(MakeMetric, HypervolumeReferencePointMustMatchObjectiveCount) {
    const auto hv = lab::MetricSpec::make(lab::MetricId::hv, 2.0, std::vector<double>{1.1, 1.1});
    lab::MetricContext context;
    EXPECT_NO_THROW(lab::make_metric(hv, context));
    context.n_obj = 2;
    EXPECT_NO_THROW(lab::make_metric(hv, context));
    context.n_obj = 3;
    EXPECT_THROW(lab::make_metric(hv, context), lab::ConfigurationError);
}

TEST(MakeMetric, ReferenceKeyPriority) {
    nlohmann::json context = {
        {"pf", {{9.0, 9.0}}}, {"reference_front", {{7.0, 7.0}}}, {"ref_pf", {{5.0, 5.0}}}, {"pareto_front", {{3.0, 4.0}}}};
    auto m = lab::make_metric(lab::MetricSpec::make(lab::MetricId::igd), context);
    EXPECT_DOUBLE_EQ(m(Matrix::from_rows({{0, 0}})), 5.0);
    context.erase("pareto_front");
    EXPECT_DOUBLE_EQ(lab::make_metric(lab::MetricSpec::make(lab::MetricId::igd, 1.0), context)(Matrix::from_rows({{0, 0}})),
                     10.0);
}

TEST(MakeMetric, DirectionsAndCatalog) {
    EXPECT_EQ(lab::MetricSpec::make(lab::MetricId::hv).direction(), lab::Direction::maximize);
    for (auto id : {lab::MetricId::igd, lab::MetricId::gd, lab::MetricId::igd_plus}) {
        EXPECT_EQ(lab::MetricSpec::make(id).direction(), lab::Direction::minimize);
    }
    EXPECT_EQ(lab::metric_catalog().size(), 4u);
    auto spec = lab::MetricSpec::make(lab::MetricId::hv, 2.0, std::vector<double>{1.1, 1.1});
    EXPECT_EQ(lab::metric_spec_from_json(lab::to_json(spec)), spec);
}
