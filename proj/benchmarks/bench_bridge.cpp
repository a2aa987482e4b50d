#include <benchmark/benchmark.h>

#include "sigmani/bridge.hpp"
#include "sigmani/signature.hpp"

using namespace sigmani;

static void BM_SphereBridgePath(benchmark::State& state) {
    auto M = make_manifold("sphere:d=2,r=1");
    HeatKernelModel kern(*M, HeatKernelMode::small_time);
    BridgeConfig cfg;
    cfg.t = 0.05;
    cfg.steps = static_cast<int>(state.range(0));
    cfg.chart_radius = 1.0;
    cfg.kernel = &kern;
    Vec x = {1.0, 0.5};
    std::uint64_t i = 0;
    for (auto _ : state) {
        Rng rng(42, i++);
        benchmark::DoNotOptimize(sample_bridge(*M, x, x, cfg, rng));
    }
}
BENCHMARK(BM_SphereBridgePath)->Arg(64)->Arg(256);

static void BM_BridgePathWithSignature(benchmark::State& state) {
    auto M = make_manifold("sphere:d=2,r=1");
    HeatKernelModel kern(*M, HeatKernelMode::small_time);
    BridgeConfig cfg;
    cfg.t = 0.05;
    cfg.steps = 256;
    cfg.chart_radius = 1.0;
    cfg.kernel = &kern;
    const int level = static_cast<int>(state.range(0));
    Vec x = {1.0, 0.5};
    std::uint64_t i = 0;
    for (auto _ : state) {
        Rng rng(43, i++);
        auto bp = sample_bridge(*M, x, x, cfg, rng);
        benchmark::DoNotOptimize(sig_piecewise_linear(bp.path, level));
    }
}
BENCHMARK(BM_BridgePathWithSignature)->Arg(4)->Arg(8);

BENCHMARK_MAIN();
