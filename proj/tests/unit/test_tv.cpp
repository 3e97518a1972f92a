#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "couplex/models.hpp"
#include "couplex/oracle.hpp"
#include "couplex/tv.hpp"

using namespace couplex;

TEST(TvExact, EqualsOneMinusOverlap) {
    const auto p = DiscreteDistribution::from_probabilities({0.7, 0.3, 0.0});
    const auto q = DiscreteDistribution::from_probabilities({0.2, 0.3, 0.5});
    EXPECT_NEAR(tv_exact(p, q), 0.5, 1e-15);
    EXPECT_NEAR(tv_exact(p, q), 1.0 - overlap(p, q), 1e-15);
    EXPECT_EQ(tv_exact(p, p), 0.0);
}

TEST(TvCurveChain, NonincreasingForRandomChains) {
    Stream rng(21, 0);
    for (int trial = 0; trial < 40; ++trial) {
        const auto chain = FiniteChain::random(2 + trial % 6, rng);
        std::vector<double> mu(chain.size(), 0.0);
        mu[trial % chain.size()] = 1.0;
        const auto curve = tv_curve_chain(chain, mu, 30);
        ASSERT_EQ(curve.tv.size(), 31u);
        EXPECT_TRUE(curve.exact);
        for (double v : curve.tv) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
        const auto verdict = check_tv_monotonicity(curve);
        EXPECT_TRUE(verdict.holds) << verdict.max_violation;
    }
}

TEST(TvCurveChain, TwoStateClosedForm) {
    // P = [[1-a, a], [b, 1-b]] contracts TV by |1 - a - b| per step.
    const double a = 0.3;
    const double b = 0.1;
    const auto chain = FiniteChain::from_rows({{1 - a, a}, {b, 1 - b}});
    const std::vector<double> mu{1.0, 0.0};
    const auto curve = tv_curve_chain(chain, mu, 10);
    const double tv0 = a / (a + b);
    for (std::size_t t = 0; t <= 10; ++t) {
        EXPECT_NEAR(curve.tv[t], tv0 * std::pow(0.6, static_cast<double>(t)), 1e-12);
    }
}

TEST(Monotonicity, DetectsARise) {
    TvCurve c;
    c.times = {0, 1, 2};
    c.tv = {0.5, 0.2, 0.3};
    c.std_error = {0, 0, 0};
    c.exact = true;
    const auto v = check_tv_monotonicity(c);
    EXPECT_FALSE(v.holds);
    EXPECT_EQ(v.violations, 1u);
    EXPECT_NEAR(v.max_violation, 0.1, 1e-15);
    EXPECT_EQ(*v.worst, (std::pair<std::size_t, std::size_t>{1, 2}));

    // The same rise inside the Monte Carlo noise band is tolerated.
    c.exact = false;
    c.std_error = {0.05, 0.05, 0.05};
    EXPECT_TRUE(check_tv_monotonicity(c).holds);
}

TEST(TvCurveModel, OuTracksGaussianOracle) {
    const auto model = models::ornstein_uhlenbeck(1, 1.0);
    const auto kernel = GaussianKernel::ornstein_uhlenbeck(1, 1.0);
    const auto bins = BinSpec::whole_space(1, 4.0, 40);
    const auto pi = kernel.stationary_bin_masses(bins);
    IntegratorConfig cfg;
    cfg.step = 1e-2;
    cfg.seed = 22;
    const std::vector<double> times{0.5, 1.0, 2.0};
    const Point x0{1.0};
    const auto curve = tv_curve_model(model, x0, pi, times, 20000, bins, cfg);
    EXPECT_FALSE(curve.exact);
    EXPECT_FALSE(curve.resolution.empty());
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double binned = tv_exact(kernel.bin_masses(x0, times[k], bins), pi);
        EXPECT_NEAR(curve.tv[k], binned, 4.0 * curve.std_error[k] + 0.02) << times[k];
    }
    EXPECT_TRUE(check_tv_monotonicity(curve).holds);
    EXPECT_NEAR(tv_exact(kernel.bin_masses(x0, 1.0, bins), pi), 0.2143776402899653, 0.01);
}

TEST(CouplingBound, NonMaximalCouplingOnlyBoundsTv) {
    std::vector<CouplingResult> draws(1000);
    for (std::size_t i = 0; i < draws.size(); ++i) {
        draws[i].coalesced = i % 2 == 0;
    }
    EXPECT_TRUE(coupling_bound_check(draws, 0.2, false).holds);
    EXPECT_FALSE(coupling_bound_check(draws, 0.2, true).holds);
    EXPECT_FALSE(coupling_bound_check(draws, 0.9, false).holds);
    EXPECT_NEAR(coupling_bound_check(draws, 0.2, false).mismatch, 0.5, 1e-15);
}
