#include <gtest/gtest.h>

#include <random>

#include "kinetax/calibration.hpp"
#include "kinetax/metrics.hpp"
#include "kinetax/presets.hpp"
#include "test_support.hpp"

using namespace kinetax;
using namespace testing_support;

TEST(Lorenz, TwoClassCurve) {
    const PopulationState x(2, 1, {0.5, 0.5});
    const std::vector<double> r{10, 30};
    const LorenzCurve curve = lorenz(x, r);
    ASSERT_EQ(curve.size(), 3u);
    EXPECT_EQ(curve[0].population, 0.0);
    EXPECT_EQ(curve[0].income, 0.0);
    EXPECT_NEAR(curve[1].population, 0.5, 1e-15);
    EXPECT_NEAR(curve[1].income, 0.25, 1e-15);
    EXPECT_EQ(curve[2].population, 1.0);
    EXPECT_EQ(curve[2].income, 1.0);
    EXPECT_NEAR(gini(curve), 0.25, 1e-12);
}

TEST(Lorenz, EmptyClassesAreSkipped) {
    const PopulationState x(4, 2, {0.1, 0.2, 0.0, 0.0, 0.3, 0.1, 0.0, 0.3});
    const std::vector<double> r{1, 2, 3, 4};
    const LorenzCurve curve = lorenz(x, r);
    ASSERT_EQ(curve.size(), 4u);
    for (std::size_t i = 1; i < curve.size(); ++i) {
        EXPECT_GT(curve[i].population, curve[i - 1].population);
        EXPECT_GT(curve[i].income, curve[i - 1].income);
    }
}

TEST(Gini, SingleOccupiedClassIsZero) {
    const std::vector<double> r{10, 20, 30};
    EXPECT_EQ(gini(PopulationState(3, 2, {0, 0, 0.4, 0.6, 0, 0}), r), 0.0);
    EXPECT_EQ(gini(PopulationState(1, 1, {1.0}), std::vector<double>{5.0}), 0.0);
}

TEST(Gini, ZeroIncomeIsAnError) {
    EXPECT_THROW(gini(PopulationState(2, 1, {0.0, 0.0}), std::vector<double>{1, 2}), StateError);
    EXPECT_THROW(gini(PopulationState(2, 1, {0.5, 0.5}), std::vector<double>{1, 2, 3}), StateError);
}

TEST(Gini, MatchesMeanDifferenceAndIsScaleInvariant) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + trial % 9, m = 1 + trial % 3;
        const ModelConfig c = random_model(rng, n, m);
        const PopulationState x = random_state(rng, n, m);
        std::vector<double> mass(n);
        for (std::size_t j = 0; j < n; ++j) mass[j] = x.class_mass(j);
        const double g = gini(x, c.r);
        EXPECT_NEAR(g, oracle::gini_mean_difference(c.r, mass), 1e-12);
        std::vector<double> scaled = c.r;
        for (double& v : scaled) v *= 7.25;
        EXPECT_NEAR(gini(x, scaled), g, 1e-12);
        // Unnormalized states give the same index.
        PopulationState y(n, m, to_vector(x));
        for (double& v : y.values()) v *= 3.0;
        EXPECT_NEAR(gini(y, c.r), g, 1e-12);
    }
}

TEST(TaxRevenue, ZeroWithoutExchanges) {
    ModelConfig c = scenario_model(1);
    c.S = 0.0;
    const TransitionTensors t = build_tensors(c, {0.5, 2.0});
    EXPECT_EQ(tax_revenue(make_initial_condition(c, 40.0), t, {0.5, 2.0}), 0.0);
}

TEST(TaxRevenue, MatchesLiteralSum) {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + trial % 5, m = 1 + trial % 3;
        const ModelConfig c = random_model(rng, n, m);
        const EnforcementParams e{0.05 * trial, 1.0 + 0.05 * (trial + 1)};
        const TransitionTensors t = build_tensors(c, e);
        const PopulationState x = random_state(rng, n, m);
        const double lit = oracle::tax_revenue(to_oracle(c), to_vector(x), e.sigma, e.xi);
        EXPECT_NEAR(tax_revenue(x, t, e), lit, 1e-13 * std::max(1.0, std::abs(lit)));
    }
}

TEST(TaxRevenue, CompliantPopulationIgnoresEnforcement) {
    ModelConfig c = paper_default_model();
    c.theta_ev = {1, 1, 1};
    const PopulationState x = make_initial_condition(c, 40.0);
    const double base = tax_revenue(x, build_tensors(c, {}), {0.0, 2.0});
    for (double sigma : {0.1, 0.5, 1.0})
        for (double xi : {1.1, 1.5, 2.0})
            EXPECT_NEAR(tax_revenue(x, build_tensors(c, {sigma, xi}), {sigma, xi}), base, 1e-18);
}

TEST(TaxRevenue, IncreasesWithAuditsAndFinesAtFixedState) {
    const ModelConfig c = scenario_model(1);
    const PopulationState x = make_initial_condition(c, kTableMeanIncome);
    const TransitionTensors t = build_tensors(c, {});
    double prev = -1.0;
    for (double sigma : {0.0, 0.1, 0.2, 0.5}) {
        const double v = tax_revenue(x, t, {sigma, 1.5});
        EXPECT_GT(v, prev);
        prev = v;
    }
    prev = -1.0;
    for (double xi : {1.1, 1.4, 1.7, 2.0}) {
        const double v = tax_revenue(x, t, {0.2, xi});
        EXPECT_GT(v, prev);
        prev = v;
    }
}

TEST(SectorMeanIncome, UniformAndEmptySectors) {
    const ModelConfig c = paper_default_model();
    const auto means = sector_mean_income(make_initial_condition(c, 50.0), c.r);
    ASSERT_EQ(means.size(), 3u);
    for (double v : means) EXPECT_NEAR(v, 50.0, 1e-12);

    PopulationState x(2, 2, {0.5, 0.0, 0.5, 0.0});
    EXPECT_THROW(sector_mean_income(x, std::vector<double>{10, 20}), StateError);
}

TEST(SectorMeanIncome, EvadersEndUpRicher) {
    const ModelConfig c = scenario_model(1);
    const EnforcementParams e{2.0 / 56, 1.25};
    const TransitionTensors t = build_tensors(c, e);
    const EquilibriumResult eq =
        find_steady_state(make_audit_system(t, e), make_initial_condition(c, kTableMeanIncome), {});
    ASSERT_TRUE(eq.converged);
    const MetricsReport rep = compute_metrics(eq.state, t, e);
    EXPECT_GT(rep.sector_mean_income[1], rep.sector_mean_income[0]);
    EXPECT_GT(rep.sector_mean_income[2], rep.sector_mean_income[1]);
    EXPECT_EQ(rep.gini, gini(eq.state, c.r));
    EXPECT_EQ(rep.enforcement, e);
}
