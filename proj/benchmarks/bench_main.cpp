#include <benchmark/benchmark.h>

#include "lclab/graph_gen.hpp"

static void BM_random_tree(benchmark::State& state) {
  for (auto _ : state) {
    auto g = lclab::random_tree(static_cast<int>(state.range(0)), 3, 7);
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_random_tree)->Arg(1 << 10)->Arg(1 << 14);

BENCHMARK_MAIN();
