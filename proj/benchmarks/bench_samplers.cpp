#include <cmath>
#include <limits>

#include <benchmark/benchmark.h>

#include "r2d2surv/dists.hpp"
#include "r2d2surv/engine.hpp"
#include "r2d2surv/prior.hpp"
#include "r2d2surv/simharness.hpp"

using namespace r2d2surv;

static void BM_GIG(benchmark::State& state) {
    Rng rng(1);
    const GIGSpec spec{0.5, 2.0, state.range(0) / 10.0 - 0.5};
    for (auto _ : state) benchmark::DoNotOptimize(sample_gig(spec, rng));
}
BENCHMARK(BM_GIG)->Arg(0)->Arg(5)->Arg(30);

static void BM_TruncatedNormalTail(benchmark::State& state) {
    Rng rng(2);
    const double lower = static_cast<double>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(sample_truncated_normal(0.0, 1.0, lower, std::numeric_limits<double>::infinity(), rng));
}
BENCHMARK(BM_TruncatedNormalTail)->Arg(0)->Arg(3)->Arg(8);

static void BM_FitGBP(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(fit_gbp_approx(std::exp(0.5), {0.5, 0.5}).divergence);
}
BENCHMARK(BM_FitGBP)->Unit(benchmark::kMillisecond);

static void BM_R2D2Sweep(benchmark::State& state) {
    SimDesign design = SimDesign::standard(static_cast<int>(state.range(0)), 0.5, 1);
    Rng data_rng(3);
    const SimDataset sim = generate_dataset(design, data_rng);
    SamplerConfig config = SamplerConfig::desk();
    prepare_r2d2(sim.data, config);
    WeibullGibbsKernel kernel(sim.data, config, ShrinkageKind::r2d2);
    Rng rng(4);
    kernel.initialize(rng);
    for (auto _ : state) kernel.sweep(rng);
}
BENCHMARK(BM_R2D2Sweep)->Arg(100)->Arg(500)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
