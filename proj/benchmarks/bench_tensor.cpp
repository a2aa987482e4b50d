#include <benchmark/benchmark.h>

#include "sigmani/rng.hpp"
#include "sigmani/signature.hpp"
#include "sigmani/tensor.hpp"

using namespace sigmani;

static void BM_TensorMul(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const int m = static_cast<int>(state.range(1));
    Rng rng(1, 0);
    TruncatedTensor a(N, m), b(N, m);
    for (auto& v : a.raw()) v = rng.next_normal();
    for (auto& v : b.raw()) v = rng.next_normal();
    for (auto _ : state) {
        benchmark::DoNotOptimize(mul(a, b));
    }
}
BENCHMARK(BM_TensorMul)->Args({2, 4})->Args({3, 4})->Args({3, 8})->Args({4, 4});

static void BM_ChenAppend(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const int m = static_cast<int>(state.range(1));
    Rng rng(2, 0);
    Vec delta(N);
    for (auto& v : delta) v = 0.01 * rng.next_normal();
    TruncatedTensor sig = TruncatedTensor::unit(N, m);
    for (auto _ : state) {
        chen_append_segment(sig, delta);
        benchmark::DoNotOptimize(sig.raw().data());
    }
}
BENCHMARK(BM_ChenAppend)->Args({3, 4})->Args({3, 8})->Args({2, 12});

static void BM_Exp(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const int m = static_cast<int>(state.range(1));
    Rng rng(3, 0);
    TruncatedTensor a(N, m);
    for (auto& v : a.raw()) v = 0.1 * rng.next_normal();
    a.scalar() = 0.0;
    for (auto _ : state) benchmark::DoNotOptimize(exp(a));
}
BENCHMARK(BM_Exp)->Args({3, 4})->Args({3, 8});

BENCHMARK_MAIN();
