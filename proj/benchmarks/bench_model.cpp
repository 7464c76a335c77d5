#include <benchmark/benchmark.h>

#include "svine/estimation.hpp"
#include "svine/forecast.hpp"

namespace {

using namespace svine;

SVineModel make_model(int d) {
  SVineSpec spec;
  spec.cross_section = VineStructure::path(d);
  for (int j = 1; j <= d; ++j) {
    spec.in_perm.push_back(j);
    spec.out_perm.push_back(j);
  }
  spec.markov_order = 1;
  SVineModel m;
  m.spec = spec;
  m.mode = MarginMode::semiparametric;
  WindowVine wv(spec, 2);
  for (const auto& c : wv.classes()) {
    const double rho = c.lag_span == 0 ? 0.5 : 0.25;
    m.copulas.emplace(c.key, BivariateCopula(FamilyTag{Family::gaussian, 0},
                                             std::vector<double>{rho}));
  }
  return m;
}

void bench_simulate_path(benchmark::State& state) {
  const auto model = make_model(static_cast<int>(state.range(0)));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_unconditional(model, 1000, ++seed));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}

void bench_sequential_fit(benchmark::State& state) {
  const auto model = make_model(static_cast<int>(state.range(0)));
  const Matrix sim = simulate_unconditional(model, 1000, 5);
  PseudoSample ps;
  ps.u = sim;
  ps.mode = MarginMode::semiparametric;
  const FitControl ctrl{{FamilyTag{Family::gaussian, 0}}, 10};
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_sequential(ps, model.spec, ctrl));
  }
}

void bench_conditional_forecast(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto model = make_model(d);
  Matrix hist(1, d, 0.5);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        simulate_conditional(model, hist, 1, 500, ++seed));
  }
}

}  // namespace

BENCHMARK(bench_simulate_path)->DenseRange(1, 5)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_sequential_fit)->DenseRange(1, 5)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_conditional_forecast)
    ->DenseRange(1, 5)
    ->Unit(benchmark::kMillisecond);
