#include <benchmark/benchmark.h>

#include "svine/bicop.hpp"
#include "svine/stats.hpp"

namespace {

using namespace svine;

const std::vector<std::pair<const char*, BivariateCopula>>& menu() {
  static const std::vector<std::pair<const char*, BivariateCopula>> m = {
      {"gaussian", BivariateCopula(FamilyTag{Family::gaussian, 0}, {0.5})},
      {"student_t", BivariateCopula(FamilyTag{Family::student_t, 0}, {0.5, 4.0})},
      {"clayton", BivariateCopula(FamilyTag{Family::clayton, 0}, {2.0})},
      {"gumbel", BivariateCopula(FamilyTag{Family::gumbel, 0}, {1.7})},
      {"frank", BivariateCopula(FamilyTag{Family::frank, 0}, {4.0})},
  };
  return m;
}

void bench_pdf(benchmark::State& state) {
  const auto& cop = menu()[state.range(0)].second;
  stats::Rng rng(1, 0);
  double acc = 0.0;
  for (auto _ : state) {
    acc += cop.log_pdf(rng.uniform(), rng.uniform());
  }
  benchmark::DoNotOptimize(acc);
  state.SetLabel(menu()[state.range(0)].first);
}

void bench_hfunc(benchmark::State& state) {
  const auto& cop = menu()[state.range(0)].second;
  stats::Rng rng(2, 0);
  double acc = 0.0;
  for (auto _ : state) {
    acc += cop.hfunc1(rng.uniform(), rng.uniform());
  }
  benchmark::DoNotOptimize(acc);
  state.SetLabel(menu()[state.range(0)].first);
}

void bench_hinv(benchmark::State& state) {
  const auto& cop = menu()[state.range(0)].second;
  stats::Rng rng(3, 0);
  double acc = 0.0;
  for (auto _ : state) {
    acc += cop.hinv1(rng.uniform(), rng.uniform());
  }
  benchmark::DoNotOptimize(acc);
  state.SetLabel(menu()[state.range(0)].first);
}

void bench_fit_pair(benchmark::State& state) {
  const auto& cop = menu()[state.range(0)].second;
  stats::Rng rng(4, 0);
  std::vector<double> u, v;
  simulate_pair(cop, 2000, rng, u, v);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_pair(u, v, {}, cop.tag()));
  }
  state.SetLabel(menu()[state.range(0)].first);
}

}  // namespace

BENCHMARK(bench_pdf)->DenseRange(0, 4);
BENCHMARK(bench_hfunc)->DenseRange(0, 4);
BENCHMARK(bench_hinv)->DenseRange(0, 4);
BENCHMARK(bench_fit_pair)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);
