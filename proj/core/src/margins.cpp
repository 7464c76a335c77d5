#include "svine/margins.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "svine/bicop.hpp"  // clamp_unit

namespace svine {

using stats::student_t_cdf;
using stats::student_t_quantile;
using stats::StudentTConsts;

// --- skew-t -------------------------------------------------------------------
//
// Centered scale-splitting parameterization: the raw splitting variable W is
// shifted and scaled so that mu is the mean and sigma the standard deviation.
// The cdf/quantile stay piecewise Student-t.

namespace {

struct SkewTConsts {
  double m1;       // E W of the raw splitting variable
  double s1;       // sd of W
  double lognorm;  // log 2/(gamma + 1/gamma)
  double g2;
  StudentTConsts tc;

  SkewTConsts(double nu, double gamma) : tc(nu) {
    const double abs_m1 =
        2.0 * std::sqrt(nu) / (std::sqrt(stats::pi) * (nu - 1.0)) *
        std::exp(std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu));
    const double gi = 1.0 / gamma;
    m1 = abs_m1 * (gamma - gi);
    const double ew2 =
        nu / (nu - 2.0) * (gamma * gamma * gamma + gi * gi * gi) / (gamma + gi);
    s1 = std::sqrt(ew2 - m1 * m1);
    lognorm = std::log(2.0 / (gamma + gi));
    g2 = gamma * gamma;
  }
};

}  // namespace

double SkewTParams::log_pdf(double x) const {
  const SkewTConsts c(nu, gamma);
  const double w = c.m1 + c.s1 * (x - mu) / sigma;
  const double z = w >= 0.0 ? w / gamma : w * gamma;
  return c.lognorm + std::log(c.s1 / sigma) + c.tc.log_pdf(z);
}

double SkewTParams::pdf(double x) const { return std::exp(log_pdf(x)); }

double SkewTParams::cdf(double x) const {
  const SkewTConsts c(nu, gamma);
  const double w = c.m1 + c.s1 * (x - mu) / sigma;
  if (w < 0.0) {
    return 2.0 / (c.g2 + 1.0) * student_t_cdf(gamma * w, nu);
  }
  return 1.0 / (c.g2 + 1.0) +
         2.0 * c.g2 / (c.g2 + 1.0) * (student_t_cdf(w / gamma, nu) - 0.5);
}

double SkewTParams::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::domain_error("skew-t quantile: u must lie in (0,1)");
  }
  const SkewTConsts c(nu, gamma);
  const double split = 1.0 / (c.g2 + 1.0);
  double w;
  if (u < split) {
    w = student_t_quantile(u * (c.g2 + 1.0) / 2.0, nu) / gamma;
  } else {
    w = gamma *
        student_t_quantile((u - split) * (c.g2 + 1.0) / (2.0 * c.g2) + 0.5, nu);
  }
  return mu + sigma * (w - c.m1) / c.s1;
}

// --- empirical margin ------------------------------------------------------------

EmpiricalMargin::EmpiricalMargin(std::vector<double> sample)
    : sorted_(std::move(sample)) {
  if (sorted_.empty()) {
    throw std::invalid_argument("empirical margin: empty sample");
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalMargin::cdf(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  const double count = static_cast<double>(it - sorted_.begin());
  return count / (static_cast<double>(sorted_.size()) + 1.0);
}

double EmpiricalMargin::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::domain_error("empirical quantile: u must lie in (0,1)");
  }
  const double T = static_cast<double>(sorted_.size());
  // G maps the k-th order statistic to k/(T+1); invert by interpolation,
  // flat beyond the sample range
  const double h = u * (T + 1.0);
  if (h <= 1.0) return sorted_.front();
  if (h >= T) return sorted_.back();
  const std::size_t lo = static_cast<std::size_t>(std::floor(h)) - 1;
  const double w = h - std::floor(h);
  return (1.0 - w) * sorted_[lo] + w * sorted_[lo + 1];
}

// --- fitting ----------------------------------------------------------------------

namespace {

double neg_loglik_skewt(std::span<const double> x, const SkewTParams& p) {
  const SkewTConsts c(p.nu, p.gamma);
  const double lg = c.lognorm + std::log(c.s1 / p.sigma);
  double ll = 0.0;
  for (double xi : x) {
    const double w = c.m1 + c.s1 * (xi - p.mu) / p.sigma;
    ll += c.tc.log_pdf(w >= 0.0 ? w / p.gamma : w * p.gamma);
  }
  return -(ll + lg * static_cast<double>(x.size()));
}

SkewTParams decode(std::span<const double> th, bool fix_gamma, bool fix_nu) {
  SkewTParams p;
  p.mu = th[0];
  p.sigma = std::exp(th[1]);
  p.nu = fix_nu ? 1e6 : 2.0 + std::exp(th[2]);
  p.gamma = fix_gamma ? 1.0 : std::exp(th[fix_nu ? 2 : 3]);
  return p;
}

}  // namespace

SkewTParams fit_margin_mle(std::span<const double> series,
                           MarginFitReport* report) {
  if (series.size() < 30) {
    throw std::domain_error("fit_margin_mle: need at least 30 observations");
  }
  for (double x : series) {
    if (!std::isfinite(x)) {
      throw std::domain_error("fit_margin_mle: non-finite value in series");
    }
  }
  const double m = stats::mean(series);
  double sd = 0.0;
  for (double x : series) sd += (x - m) * (x - m);
  sd = std::sqrt(sd / (static_cast<double>(series.size()) - 1.0));
  if (!(sd > 0.0)) {
    throw std::domain_error("fit_margin_mle: series has zero variance");
  }

  MarginFitReport rep;

  // full skew-t on (mu, log sigma, log(nu - 2), log gamma)
  {
    const std::vector<double> x0 = {m, std::log(sd), std::log(5.0), 0.0};
    auto res = stats::nelder_mead(
        [&](std::span<const double> th) {
          if (th[2] > 12.0 || std::fabs(th[3]) > 4.0) return 1e100;
          return neg_loglik_skewt(series, decode(th, false, false));
        },
        x0, 0.2, 1e-10, 3000);
    if (std::isfinite(res.fx)) {
      rep.loglik = -res.fx;
      rep.fallbacks = 0;
      rep.converged = res.converged;
      if (report) *report = rep;
      return decode(res.x, false, false);
    }
  }
  // fall back to a symmetric t
  {
    const std::vector<double> x0 = {m, std::log(sd), std::log(5.0)};
    auto res = stats::nelder_mead(
        [&](std::span<const double> th) {
          if (th[2] > 12.0) return 1e100;
          return neg_loglik_skewt(series, decode(th, true, false));
        },
        x0, 0.2, 1e-10, 2000);
    if (std::isfinite(res.fx)) {
      rep.loglik = -res.fx;
      rep.fallbacks = 1;
      rep.converged = false;
      if (report) *report = rep;
      return decode(res.x, true, false);
    }
  }
  // last resort: moment-matched normal (a large-nu symmetric t)
  SkewTParams p;
  p.mu = m;
  p.sigma = sd;
  p.nu = 1e6;
  p.gamma = 1.0;
  rep.loglik = -neg_loglik_skewt(series, p);
  rep.fallbacks = 2;
  rep.converged = false;
  if (report) *report = rep;
  return p;
}

// --- Margin wrapper ------------------------------------------------------------------

double Margin::cdf(double x) const {
  return std::visit([&](const auto& mm) { return mm.cdf(x); }, model);
}

double Margin::quantile(double u) const {
  return std::visit([&](const auto& mm) { return mm.quantile(u); }, model);
}

std::vector<double> pit(std::span<const double> series, const Margin& margin) {
  std::vector<double> out;
  out.reserve(series.size());
  for (double x : series) out.push_back(clamp_unit(margin.cdf(x)));
  return out;
}

std::string Margin::to_json_string() const {
  nlohmann::json j;
  if (parametric()) {
    const auto& p = std::get<SkewTParams>(model);
    j["type"] = "skew_t";
    j["parameters"] = {{"mu", p.mu},
                       {"sigma", p.sigma},
                       {"nu", p.nu},
                       {"gamma", p.gamma}};
  } else {
    j["type"] = "empirical";
    j["sorted_sample"] = std::get<EmpiricalMargin>(model).sorted_sample();
  }
  return j.dump();
}

Margin Margin::from_json_string(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const std::string type = j.at("type").get<std::string>();
  Margin m;
  if (type == "skew_t") {
    SkewTParams p;
    const auto& par = j.at("parameters");
    p.mu = par.at("mu").get<double>();
    p.sigma = par.at("sigma").get<double>();
    p.nu = par.at("nu").get<double>();
    p.gamma = par.at("gamma").get<double>();
    m.model = p;
  } else if (type == "empirical") {
    m.model = EmpiricalMargin(j.at("sorted_sample").get<std::vector<double>>());
  } else {
    throw std::domain_error("margin: unknown type " + type);
  }
  return m;
}

}  // namespace svine
