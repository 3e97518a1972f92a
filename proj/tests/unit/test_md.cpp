#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "couplex/error.hpp"
#include "couplex/md.hpp"
#include "couplex/models.hpp"
#include "couplex/oracle.hpp"

using namespace couplex;

namespace {

// Truncated overlap of the OU(theta = 1) time-1 laws from -1 and 1 on [-1, 1].
constexpr double kOuTruncatedOverlap = 0.5383312333750137;

MdQuery ou_query(std::size_t cells) {
    MdQuery q;
    q.start_grid = {{-1.0}, {0.0}, {1.0}};
    q.bins = BinSpec::over_box({-1.0}, {1.0}, cells);
    q.horizon = 1.0;
    return q;
}

MdReport binned_oracle_kappa(std::size_t cells) {
    const auto kernel = GaussianKernel::ornstein_uhlenbeck(1, 1.0);
    const MdQuery q = ou_query(cells);
    std::vector<DiscreteDistribution> laws;
    for (const auto& x : q.start_grid) {
        laws.push_back(kernel.bin_masses(x, q.horizon, q.bins));
    }
    return kappa_from_distributions(laws, {});
}

} // namespace

TEST(ExactMd, HandDerivedChain) {
    const auto chain = FiniteChain::from_rows({{0.5, 0.5, 0.0}, {0.25, 0.5, 0.25}, {0.0, 0.5, 0.5}});
    const std::vector<std::size_t> all{0, 1, 2};
    // Rows 0 and 2 share only the middle state.
    EXPECT_DOUBLE_EQ(exact_md_finite_chain(chain, all, all), 0.5);
    const std::vector<std::size_t> near{0, 1};
    EXPECT_DOUBLE_EQ(exact_md_finite_chain(chain, near, all), 0.75);
    const std::vector<std::size_t> bad{3};
    EXPECT_THROW(exact_md_finite_chain(chain, bad, all), InvalidArgument);
}

TEST(ExactMd, IdentityChainHasZeroCoefficient) {
    const auto chain = FiniteChain::identity(3);
    const std::vector<std::size_t> all{0, 1, 2};
    EXPECT_EQ(exact_md_finite_chain(chain, all, all), 0.0);
    const std::vector<std::size_t> one{1};
    EXPECT_EQ(exact_md_finite_chain(chain, one, all), 1.0);
}

TEST(KappaFromDistributions, MatchesFiniteChainOracle) {
    Stream rng(5, 0);
    for (int trial = 0; trial < 30; ++trial) {
        const auto chain = FiniteChain::random(5, rng);
        std::vector<DiscreteDistribution> rows;
        for (std::size_t i = 0; i < chain.size(); ++i) {
            rows.push_back(DiscreteDistribution::from_probabilities({chain.row(i).begin(), chain.row(i).end()}));
        }
        const auto r = kappa_from_distributions(rows, {});
        const std::vector<std::size_t> all{0, 1, 2, 3, 4};
        EXPECT_NEAR(r.kappa, exact_md_finite_chain(chain, all, all), 1e-12);
        EXPECT_LE(r.kappa, 1.0);
        EXPECT_GE(r.kappa, 0.0);
        EXPECT_DOUBLE_EQ(r.pair(r.argmin.first, r.argmin.second), r.kappa);
        for (std::size_t i = 0; i < 5; ++i) {
            EXPECT_NEAR(r.pair(i, i), 1.0, 1e-12);
        }
    }
}

TEST(KappaFromDistributions, StdErrorIsRootSumSquareOfCellMaxima) {
    const auto a = DiscreteDistribution::from_probabilities({0.5, 0.5});
    const auto b = DiscreteDistribution::from_probabilities({0.25, 0.75});
    const std::vector<DiscreteDistribution> laws{a, b};
    const std::vector<std::vector<double>> se{{0.03, 0.01}, {0.02, 0.04}};
    const auto r = kappa_from_distributions(laws, se);
    EXPECT_DOUBLE_EQ(r.kappa, 0.75);
    EXPECT_NEAR(r.kappa_std_error(), 0.05, 1e-15);
    EXPECT_NE(r.convention.find("[0,1]"), std::string::npos);
}

TEST(BinnedOracle, FrozenValuesForOu) {
    EXPECT_NEAR(binned_oracle_kappa(25).kappa, 0.53904, 1e-5);
    EXPECT_NEAR(binned_oracle_kappa(50).kappa, 0.538331, 1e-6);
    EXPECT_NEAR(binned_oracle_kappa(100).kappa, 0.538331, 1e-6);
    // The binned overlap converges to the continuous truncated overlap.
    EXPECT_NEAR(binned_oracle_kappa(400).kappa, kOuTruncatedOverlap, 1e-6);
    const auto r = binned_oracle_kappa(50);
    EXPECT_EQ(r.argmin, (std::pair<std::size_t, std::size_t>{0, 2}));
}

TEST(EstimateMd, OuMonteCarloAgreesWithOracle) {
    const auto model = models::ornstein_uhlenbeck(1, 1.0);
    IntegratorConfig cfg;
    cfg.step = 1e-2;
    cfg.seed = 31;
    const auto r = estimate_md(model, ou_query(20), 20000, cfg);
    EXPECT_EQ(r.points(), 3u);
    EXPECT_EQ(r.bins, 20u);
    EXPECT_EQ(r.samples, 20000u);
    EXPECT_NEAR(r.kappa, binned_oracle_kappa(20).kappa, 4.0 * r.kappa_std_error() + 0.01);
    // Outside mass of the middle start point is the Gaussian tail beyond [-1, 1].
    const double s = std::sqrt(0.43233235838169365);
    EXPECT_NEAR(r.outside_mass[1], 2.0 * normal_cdf(-1.0 / s), 0.01);
}

TEST(EstimateMd, StableAcrossBinCounts) {
    const auto model = models::ornstein_uhlenbeck(1, 1.0);
    IntegratorConfig cfg;
    cfg.step = 1e-2;
    cfg.seed = 32;
    const auto coarse = estimate_md(model, ou_query(10), 20000, cfg);
    const auto fine = estimate_md(model, ou_query(40), 20000, cfg);
    EXPECT_NEAR(coarse.kappa, fine.kappa, 0.05);
}

TEST(EstimateMd, RejectsDegenerateModelAndBadQuery) {
    IntegratorConfig cfg;
    EXPECT_THROW(estimate_md(models::zero(1), ou_query(10), 100, cfg), InvalidArgument);
    MdQuery empty = ou_query(10);
    empty.start_grid.clear();
    EXPECT_THROW(empty.validate(1), InvalidArgument);
    EXPECT_THROW(ou_query(10).validate(2), InvalidArgument);
}

TEST(Minorization, ConstantNeverExceedsKappa) {
    const auto model = models::ornstein_uhlenbeck(1, 1.0);
    IntegratorConfig cfg;
    cfg.step = 1e-2;
    cfg.seed = 33;
    const MdQuery q = ou_query(10);
    const auto hists = start_grid_histograms(model, q, 10000, cfg);
    const auto md = kappa_from_histograms(hists, q.start_grid, q.horizon);
    const auto nu = uniform_reference(q.bins);
    EXPECT_NEAR(nu.cell_mass(), 1.0, 1e-12);
    const auto mino = minorization_from_histograms(hists, nu, q.horizon);
    // mu_x >= c nu for every x implies overlap(mu_x, mu_y) >= c nu(D') = c.
    EXPECT_GT(mino.c, 0.0);
    EXPECT_LE(mino.c, md.kappa + 1e-12);
    ASSERT_TRUE(mino.argmin.has_value());
}

TEST(Minorization, ZeroMassCellGivesZeroConstant) {
    KernelHistogram h;
    h.distribution = DiscreteDistribution::from_probabilities({1.0, 0.0});
    const std::vector<KernelHistogram> hists{h};
    const auto r = minorization_from_histograms(hists, DiscreteDistribution::from_probabilities({0.5, 0.5}), 1.0);
    EXPECT_EQ(r.c, 0.0);
    EXPECT_FALSE(r.diagnostics.empty());
}
