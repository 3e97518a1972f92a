#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "couplex/error.hpp"
#include "couplex/models.hpp"
#include "couplex/oracle.hpp"
#include "couplex/sde.hpp"
#include "couplex/stats.hpp"

using namespace couplex;

TEST(TimeGrid, LastNodeLandsOnHorizon) {
    const TimeGrid g = make_time_grid(1.0, 0.3);
    ASSERT_EQ(g.steps, 4u);
    EXPECT_DOUBLE_EQ(g.time(0), 0.0);
    EXPECT_DOUBLE_EQ(g.time(3), 0.9);
    EXPECT_EQ(g.time(4), 1.0);
    EXPECT_NEAR(g.dt(3), 0.1, 1e-15);
}

TEST(TimeGrid, ExactMultipleHasNoExtraStep) {
    const TimeGrid g = make_time_grid(1.0, 0.25);
    EXPECT_EQ(g.steps, 4u);
    EXPECT_EQ(g.time(g.steps), 1.0);
}

TEST(TimeGrid, RejectsNonPositiveInputs) {
    EXPECT_THROW(make_time_grid(0.0, 0.1), InvalidArgument);
    EXPECT_THROW(make_time_grid(1.0, 0.0), InvalidArgument);
    EXPECT_THROW(make_time_grid(1.0, std::numeric_limits<double>::quiet_NaN()), InvalidArgument);
}

TEST(SimulatePath, StoresStatesIncrementsAndProvenance) {
    const auto model = models::brownian(2);
    IntegratorConfig cfg;
    cfg.step = 0.1;
    cfg.horizon = 1.0;
    cfg.seed = 7;
    cfg.substream = 3;
    const Point x0{0.5, -0.5};
    const Path p = simulate_path(model, x0, cfg, 4);
    ASSERT_EQ(p.size(), 11u);
    EXPECT_EQ(p.increments.size(), 20u);
    EXPECT_EQ(p.provenance.seed, 7u);
    EXPECT_EQ(p.provenance.substream, 3u);
    EXPECT_EQ(p.provenance.path, 4u);
    // Brownian motion with unit diffusion: states are x0 plus partial sums of increments.
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
        for (std::size_t i = 0; i < 2; ++i) {
            EXPECT_NEAR(p.state(k + 1)[i] - p.state(k)[i], p.increment(k)[i], 1e-14);
        }
    }
    const Point terminal = simulate_terminal(model, x0, 1.0, cfg, 4);
    EXPECT_EQ(terminal[0], p.state(10)[0]);
    EXPECT_EQ(terminal[1], p.state(10)[1]);
}

TEST(SampleTransition, OuMeanAndVarianceMatchClosedForm) {
    const auto model = models::ornstein_uhlenbeck(1, 1.0);
    IntegratorConfig cfg;
    cfg.step = 1e-3;
    cfg.seed = 2024;
    const Point x0{1.0};
    const auto m = sample_transition(model, x0, 1.0, 20000, cfg);
    ASSERT_EQ(m.size(), 20000u);
    const auto est = stats::mean_estimate(m.points);
    EXPECT_NEAR(est.mean, 0.36787944117144233, 4.0 * est.std_error);
    EXPECT_NEAR(stats::sample_variance(m.points), 0.43233235838169365, 0.02);
}

TEST(SampleTransition, ThreadCountDoesNotChangeOutput) {
    const auto model = models::sign_drift(2, 1.0);
    IntegratorConfig cfg;
    cfg.step = 0.01;
    cfg.seed = 5;
    cfg.substream = 9;
    const Point x0{0.1, 0.2};
    const auto one = sample_transition(model, x0, 1.0, 257, cfg);
    cfg.threads = 4;
    const auto four = sample_transition(model, x0, 1.0, 257, cfg);
    EXPECT_EQ(one.points, four.points);
}

TEST(SampleTransition, PathIsIndependentOfEnsembleSize) {
    const auto model = models::brownian(1);
    IntegratorConfig cfg;
    cfg.step = 0.05;
    cfg.seed = 1;
    const Point x0{0.0};
    const auto small = sample_transition(model, x0, 1.0, 10, cfg);
    const auto large = sample_transition(model, x0, 1.0, 100, cfg);
    for (std::size_t i = 0; i < 10; ++i) {
        EXPECT_EQ(small.points[i], large.points[i]);
    }
}

TEST(SampleAtTimes, TerminalColumnMatchesSampleTransition) {
    const auto model = models::ornstein_uhlenbeck(1, 1.0);
    IntegratorConfig cfg;
    cfg.step = 0.01;
    cfg.seed = 8;
    const Point x0{1.0};
    const std::vector<double> times{0.5, 1.0};
    const auto ladder = sample_at_times(model, x0, times, 50, cfg);
    ASSERT_EQ(ladder.size(), 2u);
    const auto direct = sample_transition(model, x0, 1.0, 50, cfg);
    for (std::size_t i = 0; i < 50; ++i) {
        EXPECT_NEAR(ladder[1].points[i], direct.points[i], 1e-12);
    }
    const std::vector<double> bad{1.0, 0.5};
    EXPECT_THROW(sample_at_times(model, x0, bad, 5, cfg), InvalidArgument);
}

TEST(SimulateExit, ZeroDynamicsNeverExitsAndStopsAtCap) {
    const auto model = models::zero(2);
    IntegratorConfig cfg;
    cfg.step = 0.01;
    const Point x0{0.2, 0.0};
    const ExitRecord r = simulate_exit(model, x0, 1.0, 1.0, cfg);
    EXPECT_FALSE(r.exited);
    EXPECT_DOUBLE_EQ(r.time, 1.0);
    EXPECT_EQ(r.state, x0);
}

TEST(SimulateExit, UncappedZeroDynamicsExhaustsBudget) {
    const auto model = models::zero(1);
    IntegratorConfig cfg;
    cfg.step = 0.01;
    const Point x0{0.0};
    EXPECT_THROW(simulate_exit(model, x0, 1.0, std::nullopt, cfg, 0, ExitOptions{1000}), ExitBudgetExceeded);
}

TEST(SimulateExit, BrownianMeanExitTimeMatchesClosedForm) {
    const auto model = models::brownian(2);
    IntegratorConfig cfg;
    cfg.step = 1e-3;
    cfg.seed = 77;
    const Point x0{0.0, 0.0};
    const auto exits = sample_exits(model, x0, 1.0, std::nullopt, 4000, cfg);
    std::vector<double> tau;
    for (const auto& e : exits) {
        ASSERT_TRUE(e.exited);
        const double r = std::hypot(e.state[0], e.state[1]);
        EXPECT_GE(r, 1.0);
        EXPECT_LE(r, 1.0 + *exit_overshoot_tolerance(model, cfg.step) * 2.0);
        tau.push_back(e.time);
    }
    const auto est = stats::mean_estimate(tau);
    // Grid-only detection overshoots tau by O(sqrt(h)); allow that bias on top of the noise.
    EXPECT_NEAR(est.mean, brownian_mean_exit_time(x0, 1.0), 4.0 * est.std_error + 0.03);
}

TEST(SimulateExit, RejectsStartOutsideBall) {
    const auto model = models::brownian(1);
    IntegratorConfig cfg;
    const Point x0{2.0};
    EXPECT_THROW(simulate_exit(model, x0, 1.0, 1.0, cfg), InvalidArgument);
}

TEST(Integrator, NonFiniteCoefficientRaisesBlowup) {
    const SdeModel model(
        1, [](std::span<const double> x, std::span<double> out) { out[0] = x[0] > 0.5 ? std::nan("") : 1.0; },
        [](std::span<const double>, std::span<double> out) { out[0] = 0.0; });
    IntegratorConfig cfg;
    cfg.step = 0.1;
    const Point x0{0.0};
    try {
        simulate_path(model, x0, cfg);
        FAIL() << "expected NumericalBlowup";
    } catch (const NumericalBlowup& e) {
        EXPECT_GT(e.state().at(0), 0.5);
        EXPECT_GT(e.time(), 0.5);
    }
}

TEST(Integrator, RejectsBadConfigAndDimension) {
    const auto model = models::brownian(2);
    IntegratorConfig cfg;
    cfg.step = -1.0;
    EXPECT_THROW(cfg.validate(), InvalidArgument);
    cfg.step = 0.1;
    const Point wrong{0.0};
    EXPECT_THROW(simulate_path(model, wrong, cfg), InvalidArgument);
}

TEST(Models, DegenerateModelIsRejectedWhereNonDegeneracyIsNeeded) {
    EXPECT_FALSE(models::zero(1).non_degenerate());
    EXPECT_THROW(models::zero(1).require_non_degenerate("estimate-md"), InvalidArgument);
    EXPECT_NO_THROW(models::brownian(1).require_non_degenerate("estimate-md"));
}

TEST(Models, DeclaredBoundsAreChecked) {
    const auto model = models::bounded_drift_1d(1.0, 1.0, 0.5);
    const Point x{0.3};
    EXPECT_NO_THROW(check_declared_bounds(model, x));
    const SdeModel liar(
        1, [](std::span<const double>, std::span<double> out) { out[0] = 3.0; },
        [](std::span<const double>, std::span<double> out) { out[0] = 1.0; }, CoefficientBounds{1.0, 1.0, 1.0});
    EXPECT_THROW(check_declared_bounds(liar, x), BoundViolation);
}

TEST(Models, RegistryParsesSpecs) {
    const auto registry = ModelRegistry::with_builtins();
    const auto spec = ModelSpec::parse("ou{theta=2,d=3}");
    EXPECT_EQ(spec.name, "ou");
    EXPECT_EQ(spec.str(), "ou{d=3,theta=2}");
    const SdeModel m = registry.make(spec);
    EXPECT_EQ(m.dim(), 3u);
    EXPECT_THROW(registry.make("nope{}"), InvalidArgument);
    EXPECT_THROW(ModelSpec::parse("ou{theta=1"), InvalidArgument);
    EXPECT_THROW(ModelSpec::parse("ou{theta=abc}"), InvalidArgument);
}
