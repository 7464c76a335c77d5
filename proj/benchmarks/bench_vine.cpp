#include <benchmark/benchmark.h>

#include "svine/vine.hpp"

namespace {

using namespace svine;

SVineSpec path_spec(int d) {
  SVineSpec spec;
  spec.cross_section = d == 1
                           ? VineStructure(std::vector<VertexId>{{1, 1}}, {})
                           : VineStructure::path(d);
  for (int j = 1; j <= d; ++j) {
    spec.in_perm.push_back(j);
    spec.out_perm.push_back(j);
  }
  spec.markov_order = 1;
  return spec;
}

void bench_build_svine(benchmark::State& state) {
  const auto spec = path_spec(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_svine(spec, 4));
  }
}

void bench_stationarity_check(benchmark::State& state) {
  const auto vine = build_svine(path_spec(static_cast<int>(state.range(0))), 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(is_stationary_vine(vine));
  }
}

void bench_enumerate_compatible(benchmark::State& state) {
  const auto cs = VineStructure::path(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(enumerate_compatible(cs));
  }
}

}  // namespace

BENCHMARK(bench_build_svine)->DenseRange(2, 6)->Unit(benchmark::kMicrosecond);
BENCHMARK(bench_stationarity_check)
    ->DenseRange(2, 6)
    ->Unit(benchmark::kMicrosecond);
BENCHMARK(bench_enumerate_compatible)
    ->DenseRange(4, 8)
    ->Unit(benchmark::kMicrosecond);
