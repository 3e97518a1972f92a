#include <benchmark/benchmark.h>

#include <vector>

#include "couplex/coupling.hpp"
#include "couplex/distribution.hpp"
#include "couplex/models.hpp"
#include "couplex/rng.hpp"
#include "couplex/sde.hpp"

using namespace couplex;

static void BM_PhiloxBlock(benchmark::State& state) {
    std::array<std::uint32_t, 4> ctr{0, 0, 0, 0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(philox4x32(ctr, {1, 2}));
        ++ctr[0];
    }
}
BENCHMARK(BM_PhiloxBlock);

static void BM_StreamNormal(benchmark::State& state) {
    Stream rng(1, 0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rng.normal());
    }
}
BENCHMARK(BM_StreamNormal);

static void BM_EulerStep(benchmark::State& state) {
    const auto dim = static_cast<std::size_t>(state.range(0));
    const auto model = models::sign_drift(dim, 1.0);
    EulerStepper stepper(model);
    Stream rng(2, 0);
    std::vector<double> x(dim, 0.1);
    std::vector<double> dw(dim);
    for (auto _ : state) {
        stepper.step(x, 1e-3, rng, dw);
        benchmark::DoNotOptimize(x.data());
    }
}
BENCHMARK(BM_EulerStep)->Arg(1)->Arg(2)->Arg(3);

static void BM_MaximalCouplingDraw(benchmark::State& state) {
    const auto cells = static_cast<std::size_t>(state.range(0));
    std::vector<double> p(cells);
    std::vector<double> q(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        p[i] = 1.0 / static_cast<double>(cells);
        q[i] = 2.0 * static_cast<double>(i + 1) / static_cast<double>(cells * (cells + 1));
    }
    const auto sampler = build_maximal_coupling(DiscreteDistribution::from_probabilities(p),
                                                DiscreteDistribution::from_probabilities(q));
    Stream rng(3, 0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sampler.draw(rng));
    }
}
BENCHMARK(BM_MaximalCouplingDraw)->Arg(2)->Arg(64)->Arg(4096);

static void BM_BinMeasure(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    EmpiricalMeasure m;
    m.dim = 2;
    Stream rng(4, 0);
    for (std::size_t i = 0; i < 2 * n; ++i) {
        m.points.push_back(rng.normal());
    }
    const auto bins = BinSpec::over_ball(2, 1.0, 8);
    for (auto _ : state) {
        benchmark::DoNotOptimize(bin_measure(m, bins));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_BinMeasure)->Arg(1 << 10)->Arg(1 << 16);
