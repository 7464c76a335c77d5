#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "svine/margins.hpp"
#include "svine/stats.hpp"

using namespace svine;
using svine::stats::Rng;

TEST_CASE("skew-t density integrates to one", "[margins]") {
  for (const auto& p :
       {SkewTParams{0.0, 1.0, 5.0, 1.0}, SkewTParams{-1.0, 2.0, 3.0, 0.7},
        SkewTParams{2.0, 0.5, 8.0, 1.8}}) {
    const double mass = stats::integrate(
        [&](double x) { return p.pdf(x); }, p.mu - 60.0 * p.sigma,
        p.mu + 60.0 * p.sigma, 1e-10);
    REQUIRE(mass == Catch::Approx(1.0).margin(1e-6));
  }
}

TEST_CASE("skew-t cdf differentiates to the density", "[margins]") {
  const SkewTParams p{0.5, 1.5, 4.0, 1.3};
  for (double x : {-2.0, 0.3, 0.5, 2.5}) {
    const double h = 1e-5;
    REQUIRE((p.cdf(x + h) - p.cdf(x - h)) / (2 * h) ==
            Catch::Approx(p.pdf(x)).margin(1e-6));
  }
}

TEST_CASE("skew-t quantile is the strict inverse of the cdf", "[margins]") {
  const SkewTParams p{-0.3, 0.8, 6.0, 0.6};
  for (double u = 0.02; u < 1.0; u += 0.07) {
    REQUIRE(p.cdf(p.quantile(u)) == Catch::Approx(u).margin(1e-8));
  }
  // symmetric median at zero
  const SkewTParams sym{0.0, 1.0, 500.0, 1.0};
  REQUIRE(sym.quantile(0.5) == Catch::Approx(0.0).margin(1e-6));
}

TEST_CASE("empirical pit follows rank over T plus one", "[margins]") {
  SECTION("distinct values") {
    Margin m;
    m.model = EmpiricalMargin({3.0, 1.0, 2.0});
    const auto u = pit(std::vector<double>{3.0, 1.0, 2.0}, m);
    REQUIRE(u == std::vector<double>{0.75, 0.25, 0.5});
  }
  SECTION("ties share the count of lower-or-equal") {
    Margin m;
    m.model = EmpiricalMargin({1.0, 2.0, 2.0, 5.0});
    const auto u = pit(std::vector<double>{1.0, 2.0, 2.0, 5.0}, m);
    REQUIRE(u[1] == Catch::Approx(3.0 / 5.0));
    REQUIRE(u[2] == Catch::Approx(3.0 / 5.0));
  }
  SECTION("values never touch zero or one") {
    Rng rng(3, 0);
    std::vector<double> x(50);
    for (auto& v : x) v = rng.normal();
    Margin m;
    m.model = EmpiricalMargin(x);
    for (double u : pit(x, m)) {
      REQUIRE(u > 0.0);
      REQUIRE(u < 1.0);
    }
  }
}

TEST_CASE("empirical quantile interpolates order statistics", "[margins]") {
  EmpiricalMargin m({1.0, 2.0, 3.0});
  REQUIRE(m.quantile(0.5) == Catch::Approx(2.0));
  REQUIRE(m.quantile(0.25) == Catch::Approx(1.0));   // = 1/(T+1)
  REQUIRE(m.quantile(0.375) == Catch::Approx(1.5));  // halfway between ranks
  // flat extrapolation beyond the sample
  REQUIRE(m.quantile(0.99) == Catch::Approx(3.0));
  REQUIRE(m.quantile(0.01) == Catch::Approx(1.0));
}

TEST_CASE("margin fitting on normal data is calibrated", "[margins]") {
  int ok = 0;
  for (int rep = 0; rep < 100; ++rep) {
    Rng rng(1000 + rep, 0);
    std::vector<double> x(5000);
    for (auto& v : x) v = rng.normal();
    const auto p = fit_margin_mle(x);
    if (std::fabs(p.mu) <= 0.05 && p.sigma >= 0.95 && p.sigma <= 1.05 &&
        p.gamma >= 0.95 && p.gamma <= 1.05) {
      ++ok;
    }
  }
  REQUIRE(ok >= 90);
}

TEST_CASE("margin fitting recovers the t tail index", "[margins]") {
  int ok = 0;
  for (int rep = 0; rep < 100; ++rep) {
    Rng rng(2000 + rep, 0);
    std::vector<double> x(5000);
    for (auto& v : x) v = stats::student_t_quantile(rng.uniform(), 5.0);
    const auto p = fit_margin_mle(x);
    if (p.nu >= 3.5 && p.nu <= 8.0) ++ok;
  }
  REQUIRE(ok >= 90);
}

TEST_CASE("degenerate series are rejected", "[margins]") {
  std::vector<double> flat(100, 1.5);
  REQUIRE_THROWS_AS(fit_margin_mle(flat), std::domain_error);
  std::vector<double> too_short(10, 0.0);
  REQUIRE_THROWS_AS(fit_margin_mle(too_short), std::domain_error);
}

TEST_CASE("parametric pit passes uniformity under the true margin",
          "[margins]") {
  const double crit = stats::ks_critical(0.01);
  int ok = 0;
  for (int rep = 0; rep < 100; ++rep) {
    Rng rng(3000 + rep, 0);
    std::vector<double> x(800);
    const SkewTParams truth{0.2, 1.1, 7.0, 1.4};
    for (auto& v : x) v = truth.quantile(rng.uniform());
    Margin m;
    m.model = truth;
    const auto u = pit(x, m);
    if (stats::ks_uniform_statistic(u) <= crit / std::sqrt(800.0)) ++ok;
  }
  REQUIRE(ok >= 95);
}

TEST_CASE("margin json round trips", "[margins]") {
  Margin par;
  par.model = SkewTParams{0.1, 2.0, 4.5, 0.9};
  const auto par2 = Margin::from_json_string(par.to_json_string());
  REQUIRE(par2.parametric());
  REQUIRE(par2.quantile(0.3) == Catch::Approx(par.quantile(0.3)));

  Margin emp;
  emp.model = EmpiricalMargin({5.0, 1.0, 3.0});
  const auto emp2 = Margin::from_json_string(emp.to_json_string());
  REQUIRE_FALSE(emp2.parametric());
  REQUIRE(emp2.cdf(3.5) == Catch::Approx(emp.cdf(3.5)));
}
