#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "couplex/error.hpp"
#include "couplex/girsanov.hpp"
#include "couplex/models.hpp"
#include "couplex/oracle.hpp"
#include "couplex/stats.hpp"

using namespace couplex;

TEST(Girsanov, DirectionNamesRoundTrip) {
    for (auto d : {WeightDirection::add_drift, WeightDirection::remove_drift}) {
        EXPECT_EQ(parse_weight_direction(to_string(d)), d);
    }
    EXPECT_THROW(parse_weight_direction("sideways"), InvalidArgument);
}

TEST(Girsanov, ExtraDriftSpecs) {
    const auto constant = DriftSplitModel::from_spec(models::brownian(2), "constant{c=0.5}");
    ASSERT_TRUE(constant.extra_sup().has_value());
    EXPECT_NEAR(*constant.extra_sup(), 0.5 * std::sqrt(2.0), 1e-15);
    std::vector<double> out(2);
    constant.extra_drift(std::vector<double>{3.0, -3.0}, out);
    EXPECT_EQ(out, (std::vector<double>{0.5, 0.5}));

    const auto sign = DriftSplitModel::from_spec(models::brownian(2, 2.0), "sign{a=1}");
    sign.tilde_extra(std::vector<double>{1.0, -1.0}, out);
    EXPECT_EQ(out, (std::vector<double>{-0.5, 0.5}));
    EXPECT_NEAR(*sign.tilde_sup(), std::sqrt(2.0) * 0.5, 1e-15);

    EXPECT_TRUE(DriftSplitModel::from_spec(models::brownian(1), "zero").extra_is_zero());
    EXPECT_THROW(DriftSplitModel::from_spec(models::brownian(1), "wiggle{a=1}"), InvalidArgument);
    EXPECT_THROW(DriftSplitModel::from_spec(models::brownian(1), "sign{b=1}"), InvalidArgument);
}

TEST(Girsanov, ZeroExtraDriftGivesUnitWeights) {
    const auto split = DriftSplitModel::from_spec(models::ornstein_uhlenbeck(1, 1.0), "zero");
    IntegratorConfig cfg;
    cfg.step = 0.01;
    cfg.seed = 3;
    const auto e = simulate_weighted(split, Point{0.5}, 1.0, 200, cfg);
    for (std::size_t i = 0; i < 200; ++i) {
        EXPECT_EQ(e.measure.weight(i), 1.0);
        EXPECT_EQ(e.log_weights[i], 0.0);
    }
    EXPECT_DOUBLE_EQ(e.effective_samples, 200.0);
}

TEST(Girsanov, TerminalStatesMatchBaseSimulation) {
    const auto model = models::brownian(1);
    const auto split = DriftSplitModel::from_spec(model, "sign{a=1}");
    IntegratorConfig cfg;
    cfg.step = 0.01;
    cfg.seed = 9;
    const auto e = simulate_weighted(split, Point{0.0}, 1.0, 100, cfg);
    const auto plain = sample_transition(model, Point{0.0}, 1.0, 100, cfg);
    EXPECT_EQ(e.measure.points, plain.points);
}

TEST(Girsanov, ConstantDriftClosedForm) {
    const double c = 0.7;
    const auto split = DriftSplitModel::from_spec(models::brownian(1), "constant{c=0.7}");
    IntegratorConfig cfg;
    cfg.step = 0.01;
    cfg.seed = 10;
    for (std::uint32_t id = 0; id < 50; ++id) {
        const Path p = simulate_path(split.base(), Point{0.2}, cfg, id);
        const double w = p.state(p.size() - 1)[0] - 0.2;
        const auto add = stochastic_exponential(split, p, WeightDirection::add_drift);
        const auto remove = stochastic_exponential(split, p, WeightDirection::remove_drift);
        EXPECT_NEAR(add.log_weight, c * w - 0.5 * c * c, 1e-12);
        EXPECT_NEAR(remove.log_weight, -c * w - 0.5 * c * c, 1e-12);
        EXPECT_NEAR(add.weight, std::exp(add.log_weight), 1e-12 * add.weight);
        EXPECT_FALSE(add.overflow);
    }
}

TEST(Girsanov, LogWeightWithinPathwiseBound) {
    const auto split = DriftSplitModel::from_spec(models::sign_drift(2, 0.5), "sign{a=1.5}");
    IntegratorConfig cfg;
    cfg.step = 0.01;
    cfg.seed = 11;
    for (std::uint32_t id = 0; id < 100; ++id) {
        const Path p = simulate_path(split.base(), Point{0.1, -0.1}, cfg, id);
        const auto bound = log_weight_bound(split, p);
        ASSERT_TRUE(bound.has_value());
        for (auto dir : {WeightDirection::add_drift, WeightDirection::remove_drift}) {
            EXPECT_LE(std::abs(stochastic_exponential(split, p, dir).log_weight), *bound + 1e-12);
        }
    }
    const auto unknown = DriftSplitModel(models::brownian(1), [](auto, std::span<double> o) { o[0] = 1.0; },
                                         std::nullopt, "custom");
    const Path p = simulate_path(unknown.base(), Point{0.0}, cfg);
    EXPECT_FALSE(log_weight_bound(unknown, p).has_value());
}

TEST(Girsanov, MeanWeightIsOne) {
    const auto split = DriftSplitModel::from_spec(models::brownian(1), "sign{a=1}");
    IntegratorConfig cfg;
    cfg.step = 0.01;
    cfg.seed = 12;
    const auto e = simulate_weighted(split, Point{0.0}, 1.0, 20000, cfg);
    std::vector<double> w(e.measure.weights.begin(), e.measure.weights.end());
    const auto est = stats::mean_estimate(w);
    EXPECT_NEAR(est.mean, 1.0, 4.0 * est.std_error);
    EXPECT_EQ(e.overflowed, 0u);
    EXPECT_GT(e.effective_samples, 1000.0);
}

TEST(Girsanov, ConstantDriftKernelMatchesExactGaussian) {
    const auto split = DriftSplitModel::from_spec(models::brownian(1), "constant{c=0.7}");
    IntegratorConfig cfg;
    cfg.step = 0.01;
    cfg.seed = 13;
    const auto bins = BinSpec::over_box({-3.0}, {4.0}, 14);
    const auto h = reweighted_kernel(split, Point{0.0}, 1.0, 40000, bins, cfg);
    // X_1 under b = 0.7 is N(0.7, 1); shifting the start by the drift reuses the Brownian kernel.
    const auto exact = GaussianKernel::brownian(1).bin_masses(Point{0.7}, 1.0, bins);
    double tv = histogram_tv(h.distribution, exact);
    EXPECT_LT(tv, 0.03);
    for (std::size_t c = 0; c < bins.size(); ++c) {
        EXPECT_NEAR(h.distribution.mass(c), exact.mass(c), 5.0 * h.mass_stderr[c] + 1e-3) << c;
    }
}

TEST(Girsanov, CheckAgainstDirectSimulation) {
    const auto split = DriftSplitModel::from_spec(models::brownian(1), "sign{a=1}");
    IntegratorConfig cfg;
    cfg.step = 0.01;
    cfg.seed = 14;
    const auto r = girsanov_check(split, Point{0.0}, 1.0, 20000, BinSpec::over_box({-4.0}, {4.0}, 20), cfg);
    EXPECT_NEAR(r.mean_rho, 1.0, 4.0 * r.std_error);
    EXPECT_LT(r.kernel_tv_vs_direct, 0.05);
    EXPECT_GT(r.tv_noise_scale, 0.0);
    EXPECT_EQ(r.samples, 20000u);
}

TEST(Girsanov, LowEffectiveSampleWarning) {
    const auto split = DriftSplitModel::from_spec(models::brownian(1), "constant{c=6}");
    IntegratorConfig cfg;
    cfg.step = 0.05;
    cfg.seed = 15;
    const auto h = reweighted_kernel(split, Point{0.0}, 1.0, 150, BinSpec::over_box({-4.0}, {4.0}, 8), cfg);
    bool warned = false;
    for (const auto& w : h.warnings) {
        warned = warned || w.rfind("LowEffectiveSample", 0) == 0;
    }
    EXPECT_TRUE(warned);
}

TEST(Girsanov, RequiresNonDegenerateBase) {
    const auto split = DriftSplitModel::from_spec(models::zero(1), "zero");
    IntegratorConfig cfg;
    EXPECT_THROW(simulate_weighted(split, Point{0.0}, 1.0, 10, cfg), InvalidArgument);
}
