#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "svine/estimation.hpp"
#include "svine/forecast.hpp"

using namespace svine;
using namespace svine::testing;
using svine::stats::Rng;

namespace {

SVineModel independence_model(int d, int p) {
  SVineModel m;
  m.spec = mvine_spec(d, p);
  m.mode = MarginMode::semiparametric;
  WindowVine wv(m.spec, p + 1);
  for (const auto& c : wv.classes()) m.copulas.emplace(c.key, BivariateCopula());
  return m;
}

}  // namespace

TEST_CASE("independence paths have uniform margins", "[forecast]") {
  const auto model = independence_model(2, 1);
  const double crit = stats::ks_critical(0.01);
  int ok = 0;
  for (int run = 0; run < 100; ++run) {
    const Matrix sim = simulate_unconditional(model, 400, 100 + run);
    bool pass = true;
    for (int j = 0; j < 2; ++j) {
      pass &= stats::ks_uniform_statistic(matrix_column(sim, j)) <=
              crit / std::sqrt(400.0);
    }
    ok += pass ? 1 : 0;
  }
  REQUIRE(ok >= 95);
}

TEST_CASE("serial dependence matches the analytic tau link", "[forecast]") {
  const auto model = gaussian_mvine_model(1, 1, 0.0, 0.5);
  const Matrix sim = simulate_unconditional(model, 100000, 5);
  std::vector<double> a(sim.rows - 1), b(sim.rows - 1);
  for (int t = 0; t + 1 < sim.rows; ++t) {
    a[t] = sim.at(t, 0);
    b[t] = sim.at(t + 1, 0);
  }
  const double want =
      BivariateCopula(FamilyTag{Family::gaussian, 0}, {0.5}).kendall_tau();
  REQUIRE_THAT(stats::kendall_tau(a, b),
               Catch::Matchers::WithinAbs(want, 0.03));
}

TEST_CASE("simulation is bit-identical under a fixed seed", "[forecast]") {
  const auto model = gaussian_mvine_model(2, 1, 0.5, 0.3);
  const Matrix s1 = simulate_unconditional(model, 200, 99);
  const Matrix s2 = simulate_unconditional(model, 200, 99);
  REQUIRE(s1.data == s2.data);
  Matrix hist(1, 2);
  hist.at(0, 0) = 0.4;
  hist.at(0, 1) = 0.6;
  const Matrix c1 = simulate_conditional(model, hist, 2, 50, 7);
  const Matrix c2 = simulate_conditional(model, hist, 2, 50, 7);
  REQUIRE(c1.data == c2.data);
}

TEST_CASE("history is irrelevant under independence", "[forecast]") {
  const auto model = independence_model(1, 1);
  int ok = 0;
  const double crit = stats::ks_critical(0.01);
  for (int run = 0; run < 100; ++run) {
    Matrix hist(1, 1);
    hist.at(0, 0) = 0.95;
    const Matrix cond = simulate_conditional(model, hist, 1, 400, 200 + run);
    const Matrix uncond = simulate_unconditional(model, 400, 7000 + run);
    const double d = stats::ks_two_sample_statistic(
        matrix_column(cond, 0), matrix_column(uncond, 0));
    ok += d <= crit * std::sqrt(2.0 / 400.0) ? 1 : 0;
  }
  REQUIRE(ok >= 95);
}

TEST_CASE("persistence pulls the conditional mean upward", "[forecast]") {
  const auto model = gaussian_mvine_model(1, 1, 0.0, 0.9);
  Matrix hist(1, 1);
  hist.at(0, 0) = 0.99;
  const Matrix sims = simulate_conditional(model, hist, 1, 10000, 42);
  const double mean = stats::mean(matrix_column(sims, 0));
  REQUIRE(mean > 0.6);
  // direct numerical integration of the conditional law as the oracle:
  // V | U = 0.99 has cdf w -> hfunc1(0.99, w)
  const auto& cop = model.copulas.at("1.1,2.1|");
  const double oracle = stats::integrate(
      [&](double v) { return 1.0 - cop.hfunc1(0.99, v); }, 0.0, 1.0, 1e-10);
  REQUIRE(mean == Catch::Approx(oracle).margin(0.02));
}

TEST_CASE("two-step paths marginalize to the one-step law", "[forecast]") {
  const auto model = gaussian_mvine_model(2, 1, 0.5, 0.3);
  Matrix hist(1, 2);
  hist.at(0, 0) = 0.3;
  hist.at(0, 1) = 0.7;
  const Matrix k1 = simulate_conditional(model, hist, 1, 4000, 31);
  const Matrix k2 = simulate_conditional(model, hist, 2, 4000, 32);
  const double crit = stats::ks_critical(0.01);
  for (int j = 0; j < 2; ++j) {
    const double d = stats::ks_two_sample_statistic(matrix_column(k1, j),
                                                    matrix_column(k2, j));
    REQUIRE(d <= crit * std::sqrt(2.0 / 4000.0));
  }
}

TEST_CASE("per-coordinate law is stable along the path", "[forecast]") {
  // empirical check of structural stationarity: the law at t = 10 matches the
  // law at t = 100 across independent runs
  const auto model = gaussian_mvine_model(2, 1, 0.5, 0.3);
  std::vector<double> at10, at100;
  for (int run = 0; run < 300; ++run) {
    const Matrix sim = simulate_unconditional(model, 100, 9000 + run);
    at10.push_back(sim.at(9, 0));
    at100.push_back(sim.at(99, 0));
  }
  const double crit = stats::ks_critical(0.01);
  REQUIRE(stats::ks_two_sample_statistic(at10, at100) <=
          crit * std::sqrt(2.0 / 300.0));
}

TEST_CASE("conditional draws average back to the stationary law", "[forecast]") {
  const auto model = gaussian_mvine_model(1, 1, 0.0, 0.6);
  std::vector<double> pooled;
  // widely spaced histories from a long run, one conditional draw each
  const Matrix source = simulate_unconditional(model, 4000, 77);
  for (int i = 0; i < 400; ++i) {
    Matrix hist(1, 1);
    hist.at(0, 0) = source.at(10 * i, 0);
    const Matrix sims = simulate_conditional(model, hist, 1, 1, 500 + i);
    pooled.push_back(sims.at(0, 0));
  }
  const Matrix uncond = simulate_unconditional(model, 4000, 888);
  const double crit = stats::ks_critical(0.01);
  const double d = stats::ks_two_sample_statistic(
      pooled, matrix_column(uncond, 0));
  REQUIRE(d <= crit * std::sqrt(1.0 / 400.0 + 1.0 / 4000.0));
}

TEST_CASE("functionals of a sample", "[forecast]") {
  REQUIRE(predict_functional(std::vector<double>{1.0, 2.0, 3.0},
                             Functional::mean()) == Catch::Approx(2.0));
  REQUIRE_THROWS_AS(
      predict_functional(std::vector<double>{1.0}, Functional::quantile(1.5)),
      std::domain_error);
  // median of N standard normals is within the asymptotic noise band
  Rng rng(4, 0);
  const int N = 20000;
  std::vector<double> x(N);
  for (auto& v : x) v = rng.normal();
  REQUIRE(std::fabs(predict_functional(x, Functional::quantile(0.5))) <=
          3.0 / std::sqrt(double(N)) * 1.2533);
}

TEST_CASE("portfolio contraction commutes with the functional", "[forecast]") {
  std::vector<double> a = {1.0, 2.0, 3.0}, b = {2.0, 0.0, 4.0};
  const double w1 = 0.3, w2 = 0.7;
  std::vector<double> contracted(3);
  for (int i = 0; i < 3; ++i) contracted[i] = w1 * a[i] + w2 * b[i];
  REQUIRE(predict_functional(contracted, Functional::mean()) ==
          Catch::Approx(w1 * 2.0 + w2 * 2.0));
}

TEST_CASE("scores behave at their fixed points", "[forecast]") {
  std::vector<double> degenerate(100, 1.7);
  REQUIRE(crps_sample(degenerate, 1.7) == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(check_loss(2.5, 2.5, 0.05) == 0.0);
  REQUIRE(check_loss(1.0, 2.0, 0.05) == Catch::Approx(1.0 * 0.95));
  REQUIRE(check_loss(3.0, 2.0, 0.05) == Catch::Approx(1.0 * 0.05));
}

TEST_CASE("sample crps matches the analytic normal value", "[forecast]") {
  // closed form for N(0,1) at y: y(2 Phi(y) - 1) + 2 phi(y) - 1/sqrt(pi)
  Rng rng(606, 0);
  const int N = 10000;
  std::vector<double> x(N);
  for (auto& v : x) v = rng.normal();
  const double y = 0.0;
  const double want = 2.0 * stats::normal_pdf(0.0) - 1.0 / std::sqrt(stats::pi);
  REQUIRE_THAT(crps_sample(x, y), Catch::Matchers::WithinAbs(want, 0.01));
}

TEST_CASE("score_forecasts averages per measure", "[forecast]") {
  Rng rng(17, 0);
  std::vector<std::vector<double>> samples(20, std::vector<double>(500));
  std::vector<double> realized(20);
  for (int i = 0; i < 20; ++i) {
    for (auto& v : samples[i]) v = rng.normal();
    realized[i] = rng.normal();
  }
  const auto scores = score_forecasts(samples, realized,
                                      {"CRPS", "logS", "VaR95", "VaR99"});
  REQUIRE(scores.size() == 4);
  REQUIRE(scores.at("CRPS") > 0.0);
  REQUIRE(scores.at("VaR95") > 0.0);
  REQUIRE(std::isfinite(scores.at("logS")));
  REQUIRE_THROWS_AS(score_forecasts({}, {}, {"CRPS"}), std::invalid_argument);
  REQUIRE_THROWS_AS(score_forecasts(samples, realized, {"nope"}),
                    std::domain_error);
}

TEST_CASE("round trip: refit of simulated data reproduces dependence",
          "[forecast]") {
  const auto truth = gaussian_mvine_model(2, 1, 0.5, 0.3);
  const Matrix sim = simulate_unconditional(truth, 3000, 2025);
  PseudoSample ps;
  ps.u = sim;
  ps.mode = MarginMode::semiparametric;
  const auto fit = fit_sequential(ps, truth.spec,
                                  {{FamilyTag{Family::gaussian, 0}}, 10});
  const Matrix resim = simulate_unconditional(fit, 3000, 2026);
  // lag-0 and lag-1 pairwise tau matrices within 0.05
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      if (a != b) {
        REQUIRE_THAT(
            stats::kendall_tau(matrix_column(sim, a), matrix_column(sim, b)),
            Catch::Matchers::WithinAbs(
                stats::kendall_tau(matrix_column(resim, a),
                                   matrix_column(resim, b)),
                0.05));
      }
      std::vector<double> x(sim.rows - 1), y(sim.rows - 1), x2(sim.rows - 1),
          y2(sim.rows - 1);
      for (int t = 0; t + 1 < sim.rows; ++t) {
        x[t] = sim.at(t, a);
        y[t] = sim.at(t + 1, b);
        x2[t] = resim.at(t, a);
        y2[t] = resim.at(t + 1, b);
      }
      REQUIRE_THAT(stats::kendall_tau(x, y),
                   Catch::Matchers::WithinAbs(stats::kendall_tau(x2, y2), 0.05));
    }
  }
}
