#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "couplex/error.hpp"
#include "couplex/oracle.hpp"

using namespace couplex;

namespace {

const std::vector<Point> kDiskGrid{{0.0, 0.0}, {0.125, 0.0}, {0.0, 0.125}};

} // namespace

TEST(Oracle, ReflectionMeetingProbability) {
    EXPECT_NEAR(reflection_meeting_probability(1.0, 1.0), 0.4795001221869535, 1e-14);
    EXPECT_NEAR(reflection_meeting_probability(0.0, 1.0), 1.0, 1e-15);
    // Scaling: distance d at horizon T equals distance d / sqrt(T) at horizon 1.
    EXPECT_NEAR(reflection_meeting_probability(2.0, 4.0), reflection_meeting_probability(1.0, 1.0), 1e-14);
}

TEST(Oracle, GaussianOverlapClosedForm) {
    EXPECT_NEAR(gaussian_overlap(-1.0, 1.0, 1.0), 0.31731050786291415, 1e-14);
    EXPECT_NEAR(gaussian_overlap(0.3, 0.3, 2.0), 1.0, 1e-15);
    EXPECT_NEAR(gaussian_tv(-0.5, 1.0, 0.5, 1.0), 0.38292492254802624, 1e-9);
    EXPECT_NEAR(gaussian_tv(-0.5, 1.0, 0.5, 1.0), 1.0 - gaussian_overlap(-0.5, 0.5, 1.0), 1e-9);
}

TEST(Oracle, OuTruncatedOverlapsFrozen) {
    const auto k = GaussianKernel::ornstein_uhlenbeck(1, 1.0);
    EXPECT_NEAR(k.mean(1.0, 1.0), 0.36787944117144233, 1e-15);
    EXPECT_NEAR(k.variance(1.0), 0.43233235838169365, 1e-15);
    ASSERT_TRUE(k.stationary_variance().has_value());
    EXPECT_DOUBLE_EQ(*k.stationary_variance(), 0.5);
    const double s = std::sqrt(k.variance(1.0));
    auto ov = [&](double a, double b) { return gaussian_overlap_truncated(k.mean(a, 1.0), k.mean(b, 1.0), s, -1, 1); };
    EXPECT_NEAR(ov(-1.0, 1.0), 0.5383312333750137, 1e-10);
    EXPECT_NEAR(ov(-1.0, 0.0), 0.6967781986965568, 1e-10);
    EXPECT_NEAR(ov(0.0, 0.0), 0.8717066887163365, 1e-10);
    EXPECT_NEAR(ov(1.0, 1.0), 0.8130710224686115, 1e-10);
    EXPECT_NEAR(ov(-1.0, -1.0), 0.8130710224686115, 1e-10);
}

TEST(Oracle, OuTvToStationaryFrozen) {
    const auto k = GaussianKernel::ornstein_uhlenbeck(1, 1.0);
    // Exact values from the density-crossing formula at 40 significant digits.
    const std::vector<std::pair<double, double>> frozen{
        {0.25, 0.52446123569659594}, {0.5, 0.37655842669773187}, {1.0, 0.21437764028902686},
        {1.5, 0.1273542311190952},   {2.0, 0.076677679166481086}, {3.0, 0.028105317716801793},
        {4.0, 0.01033428719292994}};
    for (const auto& [t, tv] : frozen) {
        EXPECT_NEAR(gaussian_tv(k.mean(1.0, t), std::sqrt(k.variance(t)), 0.0, std::sqrt(0.5)), tv, 1e-12) << t;
    }
}

TEST(Oracle, BinMassesSumToOneWithDefect) {
    const auto k = GaussianKernel::brownian(2);
    const auto bins = BinSpec::over_box({-1.0, -1.0}, {1.0, 1.0}, 4);
    const auto d = k.bin_masses(Point{0.0, 0.0}, 1.0, bins);
    EXPECT_NEAR(d.total_mass(), 1.0, 1e-12);
    const double side = 1.0 - 2.0 * normal_cdf(-1.0);
    EXPECT_NEAR(d.cell_mass(), side * side, 1e-12);
    EXPECT_THROW(k.stationary_bin_masses(bins), InvalidArgument);
}

TEST(Oracle, BrownianMeanExitTime) {
    EXPECT_DOUBLE_EQ(brownian_mean_exit_time(Point{0.0, 0.0}, 1.0), 0.5);
    EXPECT_DOUBLE_EQ(brownian_mean_exit_time(Point{0.5}, 1.0), 0.75);
}

TEST(Oracle, PoissonKernelIsAProbabilityDensity) {
    const Point x{0.3, -0.2};
    double total = 0.0;
    for (int k = 0; k < 12; ++k) {
        total += poisson_arc_mass(x, k * std::numbers::pi / 6.0, (k + 1) * std::numbers::pi / 6.0, 1.0);
    }
    EXPECT_NEAR(total, 1.0, 1e-10);
    // At the center the harmonic measure is uniform.
    EXPECT_NEAR(poisson_kernel_disk(Point{0.0, 0.0}, 1.2, 1.0), 1.0 / (2.0 * std::numbers::pi), 1e-15);
    EXPECT_THROW(poisson_kernel_disk(Point{1.0, 0.0}, 0.0, 1.0), InvalidArgument);
}

TEST(Oracle, PoissonRatiosAndOverlapsFrozen) {
    EXPECT_NEAR(poisson_ratio_bound(kDiskGrid, 1.0), 1.4294107971081333, 1e-9);
    EXPECT_NEAR(poisson_arc_ratio_bound(kDiskGrid, 1.0, 36), 1.4287286022947308, 1e-9);
    EXPECT_NEAR(poisson_min_overlap(kDiskGrid, 1.0), 0.8868798727145283, 1e-9);
    EXPECT_NEAR(poisson_arc_min_overlap(kDiskGrid, 1.0, 36), 0.88733, 1e-5);
    // Coarsening cells can only lower the ratio and raise the overlap.
    EXPECT_LE(poisson_arc_ratio_bound(kDiskGrid, 1.0, 36), poisson_ratio_bound(kDiskGrid, 1.0));
    EXPECT_GE(poisson_arc_min_overlap(kDiskGrid, 1.0, 36), poisson_min_overlap(kDiskGrid, 1.0) - 1e-12);
    const auto masses = poisson_arc_masses(kDiskGrid, 1.0, 36);
    ASSERT_EQ(masses.size(), 3u);
    EXPECT_NEAR(std::accumulate(masses[1].begin(), masses[1].end(), 0.0), 1.0, 1e-10);
}

TEST(Oracle, ChainStationaryAndMarginals) {
    const auto chain = FiniteChain::from_rows({{0.9, 0.1}, {0.5, 0.5}});
    const auto pi = chain_stationary(chain);
    EXPECT_NEAR(pi[0], 5.0 / 6.0, 1e-12);
    EXPECT_NEAR(pi[1], 1.0 / 6.0, 1e-12);
    const auto step = chain_step(chain, pi);
    EXPECT_NEAR(step[0], pi[0], 1e-12);
    const std::vector<double> mu{0.0, 1.0};
    const auto two = chain_marginal(chain, mu, 2);
    EXPECT_NEAR(two[0], 0.5 * 0.9 + 0.5 * 0.5, 1e-15);
    EXPECT_THROW(FiniteChain::from_rows({{0.5, 0.6}, {0.5, 0.5}}), InvalidKernel);
}

TEST(Oracle, GaussianEnvelopeHoldsForBrownianKernel) {
    const auto k = GaussianKernel::brownian(2);
    const double c = 1.0 / (2.0 * std::numbers::pi);
    const std::vector<double> times{0.1, 0.5, 1.0};
    const std::vector<Point> pts{{0.0, 0.0}, {0.5, 0.0}, {-1.0, 1.0}};
    // The Brownian density attains the envelope with C = C' = (2 pi)^{-1}, c = c' = 2.
    const EnvelopeConstants tight{c * 0.999, 2.0, c * 1.001, 2.0};
    const auto ok = gaussian_envelope_check(k, times, tight, pts);
    EXPECT_TRUE(ok.holds);
    EXPECT_EQ(ok.points_checked, times.size() * pts.size() * pts.size());
    const EnvelopeConstants too_narrow{c * 0.5, 2.0, c * 1.5, 1.0};
    const auto bad = gaussian_envelope_check(k, times, too_narrow, pts);
    EXPECT_FALSE(bad.holds);
    ASSERT_TRUE(bad.violation.has_value());
    EXPECT_TRUE(bad.violation->upper);
    EXPECT_THROW(gaussian_envelope_check(k, times, EnvelopeConstants{}, pts), InvalidArgument);
}
