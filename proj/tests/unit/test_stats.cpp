#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "couplex/error.hpp"
#include "couplex/oracle.hpp"
#include "couplex/rng.hpp"
#include "couplex/stats.hpp"

using namespace couplex;

TEST(Stats, MeanAndVariance) {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const auto m = stats::mean_estimate(v);
    EXPECT_DOUBLE_EQ(m.mean, 2.5);
    EXPECT_DOUBLE_EQ(stats::sample_variance(v), 5.0 / 3.0);
    EXPECT_NEAR(m.std_error, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
    EXPECT_EQ(m.n, 4u);
    EXPECT_DOUBLE_EQ(stats::binomial_std_error(0.5, 100), 0.05);
}

TEST(Stats, ChiSquareQuantilesFrozen) {
    EXPECT_NEAR(stats::chi_square_critical(35, 0.01), 57.3420734338592, 1e-8);
    EXPECT_NEAR(stats::chi_square_critical(1, 0.01), 6.6348966010212145, 1e-8);
}

TEST(Stats, ChiSquareStatistic) {
    const std::vector<double> obs{10.0, 30.0};
    const std::vector<double> exp{20.0, 20.0};
    EXPECT_DOUBLE_EQ(stats::chi_square_statistic(obs, exp), 10.0);
    const auto r = stats::chi_square_test(obs, std::vector<double>{0.5, 0.5}, 0.01);
    EXPECT_DOUBLE_EQ(r.statistic, 10.0);
    EXPECT_FALSE(r.passed);
}

TEST(Stats, KolmogorovSmirnov) {
    EXPECT_NEAR(stats::ks_constant(0.05), 1.3581015157406195, 1e-12);
    Stream rng(1, 0);
    std::vector<double> a(5000);
    std::vector<double> b(5000);
    std::vector<double> shifted(5000);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = rng.normal();
        b[i] = rng.normal();
        shifted[i] = rng.normal() + 0.3;
    }
    EXPECT_TRUE(stats::ks_two_sample(a, b, 0.001).passed);
    EXPECT_FALSE(stats::ks_two_sample(a, shifted, 0.001).passed);
    EXPECT_FALSE(stats::ks_one_sample(shifted, normal_cdf, 0.001).passed);
}
