#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "couplex/distribution.hpp"
#include "couplex/error.hpp"

using namespace couplex;

TEST(DiscreteDistribution, MassesAndDefect) {
    const std::vector<double> masses{0.2, 0.3};
    const auto d = DiscreteDistribution::from_masses({0.5, 2.0}, masses, 0.5);
    EXPECT_DOUBLE_EQ(d.density(0), 0.4);
    EXPECT_DOUBLE_EQ(d.density(1), 0.15);
    EXPECT_DOUBLE_EQ(d.cell_mass(), 0.5);
    EXPECT_DOUBLE_EQ(d.total_mass(), 1.0);
    EXPECT_NO_THROW(d.require_probability());
}

TEST(DiscreteDistribution, RejectsInvalidInput) {
    EXPECT_THROW(DiscreteDistribution({1.0}, {0.5, 0.5}), InvalidArgument);
    EXPECT_THROW(DiscreteDistribution({0.0}, {1.0}), InvalidArgument);
    EXPECT_THROW(DiscreteDistribution({1.0}, {-0.1}), InvalidArgument);
    EXPECT_THROW(DiscreteDistribution::from_probabilities({0.5, 0.4}).require_probability(), InvalidArgument);
}

TEST(Overlap, IgnoresDefectAndRequiresSharedCells) {
    const auto p = DiscreteDistribution::from_probabilities({0.5, 0.5});
    const std::vector<double> m{0.2, 0.3};
    const auto q = DiscreteDistribution::from_masses({1.0, 1.0}, m, 0.5);
    EXPECT_DOUBLE_EQ(overlap(p, q), 0.5);
    const auto r = DiscreteDistribution::from_probabilities({1.0});
    EXPECT_THROW(overlap(p, r), IncompatibleSupport);
}

TEST(BoxGrid, LocateIsHalfOpenExceptTopEdge) {
    const auto g = BoxGrid::cube(1, 0.0, 1.0, 4);
    const auto at = [&](double x) { return g.locate(std::vector<double>{x}); };
    EXPECT_EQ(*at(0.0), 0u);
    EXPECT_EQ(*at(0.25), 1u);
    EXPECT_EQ(*at(1.0), 3u);
    EXPECT_FALSE(at(-1e-9).has_value());
    EXPECT_FALSE(at(1.0 + 1e-9).has_value());
}

TEST(BoxGrid, FlattensWithLastAxisFastest) {
    const BoxGrid g({Axis{0.0, 2.0, 2}, Axis{0.0, 3.0, 3}});
    EXPECT_EQ(g.size(), 6u);
    EXPECT_DOUBLE_EQ(g.cell_volume(), 1.0);
    const std::vector<double> x{1.5, 0.5};
    EXPECT_EQ(*g.locate(x), 3u);
    EXPECT_EQ(g.unflatten(5), (std::vector<std::size_t>{1, 2}));
    EXPECT_EQ(g.center(4), (Point{1.5, 1.5}));
}

TEST(Region, BallAndBoxMembership) {
    const auto ball = Region::ball(1.0);
    EXPECT_TRUE(ball.contains(std::vector<double>{0.6, 0.8}));
    EXPECT_FALSE(ball.contains(std::vector<double>{0.8, 0.8}));
    const auto box = Region::box({0.0, 0.0}, {1.0, 2.0});
    EXPECT_TRUE(box.contains(std::vector<double>{1.0, 2.0}));
    EXPECT_FALSE(box.contains(std::vector<double>{1.1, 0.0}));
    EXPECT_TRUE(Region::whole().contains(std::vector<double>{1e9}));
    EXPECT_THROW(Region::ball(0.0), InvalidArgument);
}

TEST(BinSpec, BallVolumesApproximateTheDisk) {
    const auto bins = BinSpec::over_ball(2, 1.0, 8);
    const auto v = bins.region_volumes();
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    EXPECT_NEAR(total, M_PI, 0.01);
    const auto box = BinSpec::over_box({-1.0}, {1.0}, 10);
    for (double x : box.region_volumes()) {
        EXPECT_NEAR(x, 0.2, 1e-15);
    }
}

TEST(BinMeasure, CountsCellsAndDefect) {
    EmpiricalMeasure m;
    m.dim = 1;
    m.points = {0.1, 0.2, 0.7, 5.0};
    const auto h = bin_measure(m, BinSpec::over_box({0.0}, {1.0}, 2));
    EXPECT_DOUBLE_EQ(h.distribution.mass(0), 0.5);
    EXPECT_DOUBLE_EQ(h.distribution.mass(1), 0.25);
    EXPECT_DOUBLE_EQ(h.distribution.defect(), 0.25);
    EXPECT_EQ(h.samples, 4u);
    EXPECT_DOUBLE_EQ(h.effective_samples, 4.0);
    EXPECT_NEAR(h.mass_stderr[0], std::sqrt(0.25 / 4.0), 1e-15);
}

TEST(BinMeasure, WeightsAreUnnormalizedUnlessRequested) {
    EmpiricalMeasure m;
    m.dim = 1;
    m.points = {0.1, 0.7};
    m.weights = {3.0, 1.0};
    const auto bins = BinSpec::over_box({0.0}, {1.0}, 2);
    const auto raw = bin_measure(m, bins);
    EXPECT_DOUBLE_EQ(raw.distribution.mass(0), 1.5);
    const auto norm = bin_measure(m, bins, true);
    EXPECT_DOUBLE_EQ(norm.distribution.mass(0), 0.75);
    EXPECT_DOUBLE_EQ(norm.effective_samples, 16.0 / 10.0);
}
