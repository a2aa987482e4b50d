#include <benchmark/benchmark.h>

#include "sigmani/oracle.hpp"

using namespace sigmani::oracle;

static void BM_EvalCaseT2(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(eval_case("II;II", 2));
}
BENCHMARK(BM_EvalCaseT2);

static void BM_EvalCaseDeg2(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(eval_case("II;II", 3));
}
BENCHMARK(BM_EvalCaseDeg2);

static void BM_AggregateDeg25(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(aggregate(deg25_case_list(), 3));
}
BENCHMARK(BM_AggregateDeg25);

BENCHMARK_MAIN();
