#include "svine/bicop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace svine {

using stats::normal_cdf;
using stats::normal_quantile;
using stats::student_t_cdf;
using stats::student_t_quantile;

namespace {

constexpr double kEps = 1e-10;

std::atomic<std::uint64_t> g_fit_counter{0};

// Frank densities degenerate smoothly to independence; below this magnitude
// the closed forms cancel, so the parameter snaps to the boundary value.
double frank_theta(double theta) {
  if (std::fabs(theta) < 1e-5) return theta >= 0.0 ? 1e-5 : -1e-5;
  return theta;
}

}  // namespace

double clamp_unit(double u) { return std::clamp(u, kEps, 1.0 - kEps); }

std::string family_name(Family f) {
  switch (f) {
    case Family::independence: return "independence";
    case Family::gaussian: return "gaussian";
    case Family::student_t: return "student_t";
    case Family::clayton: return "clayton";
    case Family::gumbel: return "gumbel";
    case Family::frank: return "frank";
  }
  throw std::logic_error("family_name: unknown family");
}

Family family_from_name(const std::string& name) {
  if (name == "independence" || name == "indep") return Family::independence;
  if (name == "gaussian") return Family::gaussian;
  if (name == "student_t" || name == "student" || name == "t") {
    return Family::student_t;
  }
  if (name == "clayton") return Family::clayton;
  if (name == "gumbel") return Family::gumbel;
  if (name == "frank") return Family::frank;
  throw std::domain_error("unknown copula family: " + name);
}

int family_param_count(Family f) {
  switch (f) {
    case Family::independence: return 0;
    case Family::student_t: return 2;
    default: return 1;
  }
}

BivariateCopula::BivariateCopula() : tag_{Family::independence, 0} {}

BivariateCopula::BivariateCopula(FamilyTag tag, std::vector<double> params)
    : tag_(tag), params_(std::move(params)) {
  if (tag_.rotation != 0 && tag_.rotation != 90 && tag_.rotation != 180 &&
      tag_.rotation != 270) {
    throw std::domain_error("rotation must be one of 0, 90, 180, 270");
  }
  const bool rotatable =
      tag_.family == Family::clayton || tag_.family == Family::gumbel;
  if (!rotatable && tag_.rotation != 0) {
    throw std::domain_error("rotation is fixed to 0 for " +
                            family_name(tag_.family));
  }
  if (static_cast<int>(params_.size()) != family_param_count(tag_.family)) {
    throw std::domain_error("wrong parameter count for " +
                            family_name(tag_.family));
  }
  switch (tag_.family) {
    case Family::independence:
      break;
    case Family::gaussian:
      if (!(params_[0] > -1.0 && params_[0] < 1.0)) {
        throw std::domain_error("gaussian: rho must lie in (-1,1)");
      }
      break;
    case Family::student_t:
      if (!(params_[0] > -1.0 && params_[0] < 1.0)) {
        throw std::domain_error("student_t: rho must lie in (-1,1)");
      }
      if (!(params_[1] > 2.0)) {
        throw std::domain_error("student_t: nu must exceed 2");
      }
      {
        const double nu = params_[1];
        t_lognorm_ = std::lgamma(0.5 * (nu + 2.0)) + std::lgamma(0.5 * nu) -
                     2.0 * std::lgamma(0.5 * (nu + 1.0)) -
                     0.5 * std::log1p(-params_[0] * params_[0]);
        t_lognorm1_ = 0.5 * (nu + 1.0);
      }
      break;
    case Family::clayton:
      if (!(params_[0] > 0.0)) {
        throw std::domain_error("clayton: theta must be positive");
      }
      break;
    case Family::gumbel:
      if (!(params_[0] >= 1.0)) {
        throw std::domain_error("gumbel: theta must be >= 1");
      }
      break;
    case Family::frank:
      if (!(params_[0] != 0.0) || !std::isfinite(params_[0])) {
        throw std::domain_error("frank: theta must be finite and nonzero");
      }
      break;
  }
}

// --- base-family (rotation 0) formulas --------------------------------------

namespace {

struct ClaytonOps {
  // log(u^-t + v^-t - 1), computed in log space
  static double log_s(double t, double lu, double lv) {
    const double a = -t * lu, b = -t * lv;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m) - std::exp(-m));
  }
  static double log_pdf(double t, double u, double v) {
    const double lu = std::log(u), lv = std::log(v);
    return std::log1p(t) - (t + 1.0) * (lu + lv) -
           (2.0 + 1.0 / t) * log_s(t, lu, lv);
  }
  static double cdf(double t, double u, double v) {
    return std::exp(-log_s(t, std::log(u), std::log(v)) / t);
  }
  static double h1(double t, double u, double v) {
    const double lu = std::log(u), lv = std::log(v);
    return std::exp(-(t + 1.0) * lu - (1.0 / t + 1.0) * log_s(t, lu, lv));
  }
  static double hinv1(double t, double u, double w) {
    const double lu = std::log(u);
    const double log_s = -t / (t + 1.0) * std::log(w) - t * lu;
    double vpow = std::exp(log_s) - std::expm1(-t * lu);
    vpow = std::max(vpow, 1.0);  // v^-t >= 1 for v in (0,1]
    return std::exp(-std::log(vpow) / t);
  }
};

struct GumbelOps {
  static double log_big_s(double t, double x, double y) {
    // log((x^t + y^t)^(1/t)) with x, y = -log(u), -log(v)
    const double a = t * std::log(x), b = t * std::log(y);
    const double m = std::max(a, b);
    return (m + std::log(std::exp(a - m) + std::exp(b - m))) / t;
  }
  static double log_pdf(double t, double u, double v) {
    const double x = -std::log(u), y = -std::log(v);
    const double ls = log_big_s(t, x, y);
    const double s = std::exp(ls);
    return -s + (t - 1.0) * (std::log(x) + std::log(y)) + x + y +
           (1.0 - 2.0 * t) * ls + std::log(s + t - 1.0);
  }
  static double cdf(double t, double u, double v) {
    return std::exp(-std::exp(log_big_s(t, -std::log(u), -std::log(v))));
  }
  static double h1(double t, double u, double v) {
    const double x = -std::log(u), y = -std::log(v);
    const double ls = log_big_s(t, x, y);
    return std::exp(-std::exp(ls) + (t - 1.0) * std::log(x) +
                    (1.0 - t) * ls + x);
  }
};

struct FrankOps {
  static double log_pdf(double t, double u, double v) {
    t = frank_theta(t);
    const double d = std::expm1(-t);
    const double gu = std::expm1(-t * u), gv = std::expm1(-t * v);
    return std::log(std::fabs(t)) + std::log(std::fabs(d)) - t * (u + v) -
           2.0 * std::log(std::fabs(d + gu * gv));
  }
  static double cdf(double t, double u, double v) {
    t = frank_theta(t);
    const double d = std::expm1(-t);
    return -std::log1p(std::expm1(-t * u) * std::expm1(-t * v) / d) / t;
  }
  static double h1(double t, double u, double v) {
    t = frank_theta(t);
    const double d = std::expm1(-t);
    const double gu = std::expm1(-t * u), gv = std::expm1(-t * v);
    return std::exp(-t * u) * gv / (d + gu * gv);
  }
  static double hinv1(double t, double u, double w) {
    t = frank_theta(t);
    const double d = std::expm1(-t);
    const double gv = w * d / (std::exp(-t * u) * (1.0 - w) + w);
    return -std::log1p(gv) / t;
  }
};

// Monotone inversion in the second argument of h (bisection + final secant).
double invert_monotone_h(const std::function<double(double)>& h, double w) {
  double lo = kEps, hi = 1.0 - kEps;
  double flo = h(lo) - w, fhi = h(hi) - w;
  if (flo >= 0.0) return lo;
  if (fhi <= 0.0) return hi;
  for (int i = 0; i < 60 && hi - lo > 1e-14; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = h(mid) - w;
    if (fm == 0.0) return mid;
    if (fm < 0.0) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double BivariateCopula::log_pdf(double u, double v) const {
  u = clamp_unit(u);
  v = clamp_unit(v);
  // map rotated coordinates to base-family coordinates
  switch (tag_.rotation) {
    case 90: u = 1.0 - u; break;
    case 180: u = 1.0 - u; v = 1.0 - v; break;
    case 270: v = 1.0 - v; break;
    default: break;
  }
  switch (tag_.family) {
    case Family::independence:
      return 0.0;
    case Family::gaussian: {
      const double r = params_[0];
      const double x = normal_quantile(u), y = normal_quantile(v);
      const double om = 1.0 - r * r;
      return -0.5 * std::log(om) -
             (r * r * (x * x + y * y) - 2.0 * r * x * y) / (2.0 * om);
    }
    case Family::student_t: {
      const double r = params_[0], nu = params_[1];
      const double x = student_t_quantile(u, nu), y = student_t_quantile(v, nu);
      const double q = (x * x - 2.0 * r * x * y + y * y) / (1.0 - r * r);
      return t_lognorm_ - 0.5 * (nu + 2.0) * std::log1p(q / nu) +
             t_lognorm1_ * (std::log1p(x * x / nu) + std::log1p(y * y / nu));
    }
    case Family::clayton:
      return ClaytonOps::log_pdf(params_[0], u, v);
    case Family::gumbel:
      return GumbelOps::log_pdf(params_[0], u, v);
    case Family::frank:
      return FrankOps::log_pdf(params_[0], u, v);
  }
  throw std::logic_error("log_pdf: unknown family");
}

double BivariateCopula::pdf(double u, double v) const {
  return std::exp(log_pdf(u, v));
}

namespace {

double base_cdf(Family fam, std::span<const double> par, double u, double v) {
  switch (fam) {
    case Family::independence:
      return u * v;
    case Family::gaussian:
      return stats::bivariate_normal_cdf(normal_quantile(u), normal_quantile(v),
                                         par[0]);
    case Family::student_t: {
      const double r = par[0], nu = par[1];
      const double x = student_t_quantile(u, nu), y = student_t_quantile(v, nu);
      const double s_lo = std::min(x, student_t_quantile(1e-13, nu));
      const stats::StudentTConsts tc(nu);
      auto f = [&](double s) {
        const double scale =
            std::sqrt((nu + s * s) * (1.0 - r * r) / (nu + 1.0));
        return std::exp(tc.log_pdf(s)) *
               student_t_cdf((y - r * s) / scale, nu + 1.0);
      };
      return stats::integrate(f, s_lo, x, 1e-12);
    }
    case Family::clayton:
      return ClaytonOps::cdf(par[0], u, v);
    case Family::gumbel:
      return GumbelOps::cdf(par[0], u, v);
    case Family::frank:
      return FrankOps::cdf(par[0], u, v);
  }
  throw std::logic_error("cdf: unknown family");
}

}  // namespace

double BivariateCopula::cdf(double u, double v) const {
  u = clamp_unit(u);
  v = clamp_unit(v);
  switch (tag_.rotation) {
    case 0:
      return base_cdf(tag_.family, params_, u, v);
    case 90:
      return v - base_cdf(tag_.family, params_, 1.0 - u, v);
    case 180:
      return u + v - 1.0 +
             base_cdf(tag_.family, params_, 1.0 - u, 1.0 - v);
    case 270:
      return u - base_cdf(tag_.family, params_, u, 1.0 - v);
  }
  throw std::logic_error("cdf: bad rotation");
}

namespace {

// h1 for the unrotated families; all menu families are exchangeable, so
// h2_base(u, v) = h1_base(v, u).
double base_h1(Family fam, std::span<const double> par, double u, double v) {
  switch (fam) {
    case Family::independence:
      return v;
    case Family::gaussian: {
      const double r = par[0];
      const double x = normal_quantile(u), y = normal_quantile(v);
      return normal_cdf((y - r * x) / std::sqrt(1.0 - r * r));
    }
    case Family::student_t: {
      const double r = par[0], nu = par[1];
      const double x = student_t_quantile(u, nu), y = student_t_quantile(v, nu);
      const double scale = std::sqrt((nu + x * x) * (1.0 - r * r) / (nu + 1.0));
      return student_t_cdf((y - r * x) / scale, nu + 1.0);
    }
    case Family::clayton:
      return ClaytonOps::h1(par[0], u, v);
    case Family::gumbel:
      return GumbelOps::h1(par[0], u, v);
    case Family::frank:
      return FrankOps::h1(par[0], u, v);
  }
  throw std::logic_error("hfunc: unknown family");
}

double base_hinv1(Family fam, std::span<const double> par, double u, double w) {
  switch (fam) {
    case Family::independence:
      return w;
    case Family::gaussian: {
      const double r = par[0];
      const double x = normal_quantile(u);
      return normal_cdf(r * x + std::sqrt(1.0 - r * r) * normal_quantile(w));
    }
    case Family::student_t: {
      const double r = par[0], nu = par[1];
      const double x = student_t_quantile(u, nu);
      const double scale = std::sqrt((nu + x * x) * (1.0 - r * r) / (nu + 1.0));
      return student_t_cdf(r * x + scale * student_t_quantile(w, nu + 1.0), nu);
    }
    case Family::clayton:
      return ClaytonOps::hinv1(par[0], u, w);
    case Family::gumbel:
      return invert_monotone_h(
          [&](double v) { return GumbelOps::h1(par[0], u, v); }, w);
    case Family::frank:
      return FrankOps::hinv1(par[0], u, w);
  }
  throw std::logic_error("hinv: unknown family");
}

}  // namespace

double BivariateCopula::hfunc1(double u, double v) const {
  u = clamp_unit(u);
  v = clamp_unit(v);
  double r;
  switch (tag_.rotation) {
    case 0: r = base_h1(tag_.family, params_, u, v); break;
    case 90: r = base_h1(tag_.family, params_, 1.0 - u, v); break;
    case 180:
      r = 1.0 - base_h1(tag_.family, params_, 1.0 - u, 1.0 - v);
      break;
    case 270: r = 1.0 - base_h1(tag_.family, params_, u, 1.0 - v); break;
    default: throw std::logic_error("hfunc1: bad rotation");
  }
  return clamp_unit(r);
}

double BivariateCopula::hfunc2(double u, double v) const {
  u = clamp_unit(u);
  v = clamp_unit(v);
  double r;
  switch (tag_.rotation) {
    case 0: r = base_h1(tag_.family, params_, v, u); break;
    case 90: r = 1.0 - base_h1(tag_.family, params_, v, 1.0 - u); break;
    case 180:
      r = 1.0 - base_h1(tag_.family, params_, 1.0 - v, 1.0 - u);
      break;
    case 270: r = base_h1(tag_.family, params_, 1.0 - v, u); break;
    default: throw std::logic_error("hfunc2: bad rotation");
  }
  return clamp_unit(r);
}

double BivariateCopula::hinv1(double u, double w) const {
  u = clamp_unit(u);
  w = clamp_unit(w);
  double r;
  switch (tag_.rotation) {
    case 0: r = base_hinv1(tag_.family, params_, u, w); break;
    case 90: r = base_hinv1(tag_.family, params_, 1.0 - u, w); break;
    case 180:
      r = 1.0 - base_hinv1(tag_.family, params_, 1.0 - u, 1.0 - w);
      break;
    case 270:
      r = 1.0 - base_hinv1(tag_.family, params_, u, 1.0 - w);
      break;
    default: throw std::logic_error("hinv1: bad rotation");
  }
  return clamp_unit(r);
}

double BivariateCopula::hinv2(double w, double v) const {
  w = clamp_unit(w);
  v = clamp_unit(v);
  double r;
  switch (tag_.rotation) {
    case 0: r = base_hinv1(tag_.family, params_, v, w); break;
    case 90:
      r = 1.0 - base_hinv1(tag_.family, params_, v, 1.0 - w);
      break;
    case 180:
      r = 1.0 - base_hinv1(tag_.family, params_, 1.0 - v, 1.0 - w);
      break;
    case 270: r = base_hinv1(tag_.family, params_, 1.0 - v, w); break;
    default: throw std::logic_error("hinv2: bad rotation");
  }
  return clamp_unit(r);
}

double hfunc(const BivariateCopula& cop, double u, double v, int direction) {
  if (direction == 1) return cop.hfunc1(v, u);
  if (direction == 2) return cop.hfunc2(u, v);
  throw std::domain_error("hfunc: direction must be 1 or 2");
}

double hinv(const BivariateCopula& cop, double w, double v, int direction) {
  if (direction == 1) return cop.hinv1(v, w);
  if (direction == 2) return cop.hinv2(w, v);
  throw std::domain_error("hinv: direction must be 1 or 2");
}

// --- Kendall's tau -----------------------------------------------------------

namespace {

double debye1(double theta) {
  // D1(t) = (1/t) Int_0^t s / (e^s - 1) ds, with integrand -> 1 at 0
  const auto& rule = stats::gauss_legendre(64);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = theta * rule.nodes[i];
    const double val = x < 1e-12 ? 1.0 : x / std::expm1(x);
    s += rule.weights[i] * val;
  }
  return s;
}

double frank_tau(double theta) {
  if (theta == 0.0) return 0.0;
  const double a = std::fabs(theta);
  const double tau = 1.0 + 4.0 * (debye1(a) - 1.0) / a;
  return theta > 0.0 ? tau : -tau;
}

}  // namespace

double BivariateCopula::kendall_tau() const {
  const double sign =
      (tag_.rotation == 90 || tag_.rotation == 270) ? -1.0 : 1.0;
  switch (tag_.family) {
    case Family::independence:
      return 0.0;
    case Family::gaussian:
    case Family::student_t:
      return 2.0 / stats::pi * std::asin(params_[0]);
    case Family::clayton:
      return sign * params_[0] / (params_[0] + 2.0);
    case Family::gumbel:
      return sign * (1.0 - 1.0 / params_[0]);
    case Family::frank:
      return frank_tau(params_[0]);
  }
  throw std::logic_error("kendall_tau: unknown family");
}

std::vector<double> tau_inversion(FamilyTag tag, double tau) {
  const double at = std::min(std::fabs(tau), 0.93);
  switch (tag.family) {
    case Family::independence:
      return {};
    case Family::gaussian:
      return {std::sin(stats::pi * tau / 2.0)};
    case Family::student_t:
      return {std::sin(stats::pi * tau / 2.0), 5.0};
    case Family::clayton:
      return {std::max(2.0 * at / (1.0 - at), 1e-3)};
    case Family::gumbel:
      return {std::max(1.0 / (1.0 - at), 1.0 + 1e-3)};
    case Family::frank: {
      if (at < 1e-4) return {tau >= 0.0 ? 1e-3 : -1e-3};
      const double theta = stats::solve_bracketed(
          [&](double t) { return frank_tau(t) - at; }, 1e-4, 100.0, 1e-9);
      return {tau >= 0.0 ? theta : -theta};
    }
  }
  throw std::logic_error("tau_inversion: unknown family");
}

// --- fitting ------------------------------------------------------------------

namespace {

struct PairData {
  std::vector<double> u, v, w;
  double wsum = 0.0;
};

// Rotate observations into base-family coordinates so the optimizer only ever
// sees rotation 0.
PairData prepare_data(std::span<const double> u, std::span<const double> v,
                      std::span<const double> weights, int rotation) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("fit_pair: u and v must have equal length");
  }
  if (!weights.empty() && weights.size() != u.size()) {
    throw std::invalid_argument("fit_pair: weights length mismatch");
  }
  PairData d;
  d.u.reserve(u.size());
  d.v.reserve(u.size());
  d.w.reserve(u.size());
  double wsum = 0.0, wsq = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double wi = weights.empty() ? 1.0 : weights[i];
    if (wi < 0.0) throw std::domain_error("fit_pair: negative weight");
    if (wi == 0.0) continue;
    double uu = clamp_unit(u[i]), vv = clamp_unit(v[i]);
    switch (rotation) {
      case 90: uu = 1.0 - uu; break;
      case 180: uu = 1.0 - uu; vv = 1.0 - vv; break;
      case 270: vv = 1.0 - vv; break;
      default: break;
    }
    d.u.push_back(uu);
    d.v.push_back(vv);
    d.w.push_back(wi);
    wsum += wi;
    wsq += wi * wi;
  }
  d.wsum = wsum;
  const double n_eff = wsq > 0.0 ? wsum * wsum / wsq : 0.0;
  if (n_eff < 10.0) {
    throw std::domain_error("fit_pair: fewer than 10 effective observations");
  }
  return d;
}

double kish_neff(std::span<const double> w) {
  if (w.empty()) return 0.0;
  double s = 0.0, s2 = 0.0;
  for (double x : w) {
    s += x;
    s2 += x * x;
  }
  return s2 > 0.0 ? s * s / s2 : 0.0;
}

// Weighted log-likelihood maximization for a single transformed parameter,
// with per-family cached transforms of the data.
struct ScalarFit {
  double loglik;
  double param;
};

ScalarFit fit_scalar(Family fam, const PairData& d, double start_param,
                     double nu_for_t = 0.0) {
  const std::size_t n = d.u.size();
  std::function<double(double)> neg_ll;
  double lo, hi, start_a;

  switch (fam) {
    case Family::gaussian: {
      auto x = std::make_shared<std::vector<double>>(n);
      auto y = std::make_shared<std::vector<double>>(n);
      for (std::size_t i = 0; i < n; ++i) {
        (*x)[i] = normal_quantile(d.u[i]);
        (*y)[i] = normal_quantile(d.v[i]);
      }
      neg_ll = [x, y, &d, n](double a) {
        const double r = std::tanh(a);
        const double om = 1.0 - r * r;
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double xi = (*x)[i], yi = (*y)[i];
          ll += d.w[i] * (-(r * r * (xi * xi + yi * yi) - 2.0 * r * xi * yi) /
                          (2.0 * om));
        }
        ll -= 0.5 * d.wsum * std::log(om);
        return -ll;
      };
      lo = -3.8;
      hi = 3.8;
      start_a = std::atanh(std::clamp(start_param, -0.999, 0.999));
      break;
    }
    case Family::student_t: {
      const double nu = nu_for_t;
      auto x = std::make_shared<std::vector<double>>(n);
      auto y = std::make_shared<std::vector<double>>(n);
      auto lx = std::make_shared<std::vector<double>>(n);
      for (std::size_t i = 0; i < n; ++i) {
        (*x)[i] = student_t_quantile(d.u[i], nu);
        (*y)[i] = student_t_quantile(d.v[i], nu);
        (*lx)[i] = std::log1p((*x)[i] * (*x)[i] / nu) +
                   std::log1p((*y)[i] * (*y)[i] / nu);
      }
      const double lg = std::lgamma(0.5 * (nu + 2.0)) + std::lgamma(0.5 * nu) -
                        2.0 * std::lgamma(0.5 * (nu + 1.0));
      neg_ll = [x, y, lx, lg, nu, &d, n](double a) {
        const double r = std::tanh(a);
        const double om = 1.0 - r * r;
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double xi = (*x)[i], yi = (*y)[i];
          const double q = (xi * xi - 2.0 * r * xi * yi + yi * yi) / om;
          ll += d.w[i] * (-0.5 * (nu + 2.0) * std::log1p(q / nu) +
                          0.5 * (nu + 1.0) * (*lx)[i]);
        }
        ll += d.wsum * (lg - 0.5 * std::log(om));
        return -ll;
      };
      lo = -3.8;
      hi = 3.8;
      start_a = std::atanh(std::clamp(start_param, -0.999, 0.999));
      break;
    }
    case Family::clayton: {
      auto lu = std::make_shared<std::vector<double>>(n);
      auto lv = std::make_shared<std::vector<double>>(n);
      for (std::size_t i = 0; i < n; ++i) {
        (*lu)[i] = std::log(d.u[i]);
        (*lv)[i] = std::log(d.v[i]);
      }
      neg_ll = [lu, lv, &d, n](double a) {
        const double t = std::exp(a);
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          ll += d.w[i] * (std::log1p(t) - (t + 1.0) * ((*lu)[i] + (*lv)[i]) -
                          (2.0 + 1.0 / t) *
                              ClaytonOps::log_s(t, (*lu)[i], (*lv)[i]));
        }
        return -ll;
      };
      lo = std::log(1e-3);
      hi = std::log(28.0);
      start_a = std::log(std::clamp(start_param, 1.1e-3, 27.0));
      break;
    }
    case Family::gumbel: {
      neg_ll = [&d, n](double a) {
        const double t = 1.0 + std::exp(a);
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          ll += d.w[i] * GumbelOps::log_pdf(t, d.u[i], d.v[i]);
        }
        return -ll;
      };
      lo = std::log(1e-3);
      hi = std::log(49.0);
      start_a = std::log(std::clamp(start_param - 1.0, 1.1e-3, 48.0));
      break;
    }
    case Family::frank: {
      neg_ll = [&d, n](double a) {
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          ll += d.w[i] * FrankOps::log_pdf(a, d.u[i], d.v[i]);
        }
        return -ll;
      };
      lo = -50.0;
      hi = 50.0;
      start_a = std::clamp(start_param, -49.0, 49.0);
      break;
    }
    default:
      throw std::logic_error("fit_scalar: unsupported family");
  }

  const double f_start = neg_ll(start_a);
  auto res = stats::brent_minimize(neg_ll, lo, hi, 1e-10);
  double best_a = res.x, best_f = res.fx;
  if (!(best_f <= f_start) || !std::isfinite(best_f)) {
    best_a = start_a;
    best_f = f_start;
  }
  double param;
  switch (fam) {
    case Family::gaussian:
    case Family::student_t: param = std::tanh(best_a); break;
    case Family::clayton: param = std::exp(best_a); break;
    case Family::gumbel: param = 1.0 + std::exp(best_a); break;
    default: param = best_a; break;
  }
  return {-best_f, param};
}

double weighted_loglik(const BivariateCopula& cop, const PairData& d) {
  // data in d are already in base coordinates; build an unrotated twin
  BivariateCopula base(FamilyTag{cop.tag().family, 0}, cop.params());
  double ll = 0.0;
  for (std::size_t i = 0; i < d.u.size(); ++i) {
    ll += d.w[i] * base.log_pdf(d.u[i], d.v[i]);
  }
  return ll;
}

}  // namespace

BivariateCopula fit_pair(std::span<const double> u, std::span<const double> v,
                         std::span<const double> weights, FamilyTag family,
                         PairFitReport* report) {
  g_fit_counter.fetch_add(1, std::memory_order_relaxed);
  PairData d = prepare_data(u, v, weights, family.rotation);
  PairFitReport rep;
  rep.n_eff = kish_neff(d.w);

  if (family.family == Family::independence) {
    rep.loglik = 0.0;
    if (report) *report = rep;
    return BivariateCopula();
  }

  double tau_hat = stats::kendall_tau(d.u, d.v);
  if (!std::isfinite(tau_hat)) tau_hat = 0.0;
  // base-coordinate fits see positively oriented data for 90/270 rotations
  const std::vector<double> start = tau_inversion(
      FamilyTag{family.family, 0},
      (family.family == Family::clayton || family.family == Family::gumbel)
          ? std::fabs(tau_hat)
          : tau_hat);

  std::vector<double> params;
  double loglik = 0.0;
  bool fallback = false;

  try {
    if (family.family == Family::student_t) {
      // profile nu over a coarse grid, then polish both coordinates
      static const double nu_grid[] = {2.5, 3.0, 4.0, 6.0, 10.0, 20.0, 30.0};
      double best_ll = -std::numeric_limits<double>::infinity();
      double best_rho = start[0], best_nu = 5.0;
      for (double nu : nu_grid) {
        const auto fit = fit_scalar(Family::student_t, d, start[0], nu);
        if (fit.loglik > best_ll) {
          best_ll = fit.loglik;
          best_rho = fit.param;
          best_nu = nu;
        }
      }
      for (int round = 0; round < 2; ++round) {
        auto nu_obj = [&](double lnu) {
          const double nu = 2.0 + std::exp(lnu);
          const auto fit = fit_scalar(Family::student_t, d, best_rho, nu);
          return -fit.loglik;
        };
        const auto nu_res = stats::brent_minimize(
            nu_obj, std::log(0.3), std::log(58.0), 1e-3, 40);
        const double nu = 2.0 + std::exp(nu_res.x);
        const auto fit = fit_scalar(Family::student_t, d, best_rho, nu);
        if (fit.loglik > best_ll) {
          best_ll = fit.loglik;
          best_rho = fit.param;
          best_nu = nu;
        }
      }
      params = {best_rho, best_nu};
      loglik = best_ll;
    } else {
      const auto fit = fit_scalar(family.family, d, start[0]);
      params = {fit.param};
      loglik = fit.loglik;
    }
  } catch (const std::exception&) {
    params = start;
    fallback = true;
  }

  BivariateCopula result(family, params);
  if (fallback || !std::isfinite(loglik)) {
    BivariateCopula start_cop(family, start);
    loglik = weighted_loglik(start_cop, d);
    result = start_cop;
    fallback = true;
  }
  rep.loglik = loglik;
  rep.used_tau_fallback = fallback;
  rep.converged = !fallback;
  if (report) *report = rep;
  return result;
}

BivariateCopula select_family(std::span<const double> u,
                              std::span<const double> v,
                              std::span<const double> weights,
                              std::span<const FamilyTag> candidates,
                              PairFitReport* report) {
  if (candidates.empty()) {
    throw std::invalid_argument("select_family: empty candidate list");
  }
  struct Entry {
    double aic;
    int params;
    int order;
    BivariateCopula cop;
    PairFitReport rep;
  };
  std::vector<Entry> fits;
  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    try {
      PairFitReport rep;
      BivariateCopula cop = fit_pair(u, v, weights, candidates[ci], &rep);
      const double aic = -2.0 * rep.loglik + 2.0 * cop.param_count();
      if (!std::isfinite(aic)) continue;
      fits.push_back(
          {aic, cop.param_count(), static_cast<int>(ci), cop, rep});
    } catch (const std::exception&) {
      // failed candidates are excluded
    }
  }
  if (fits.empty()) {
    if (report) *report = PairFitReport{false, true, 0.0, 0.0};
    return BivariateCopula();
  }
  std::sort(fits.begin(), fits.end(), [](const Entry& a, const Entry& b) {
    if (std::fabs(a.aic - b.aic) > 1e-9) return a.aic < b.aic;
    if (a.params != b.params) return a.params < b.params;
    return a.order < b.order;
  });
  if (report) *report = fits.front().rep;
  return fits.front().cop;
}

std::vector<FamilyTag> expand_family_menu(const std::vector<Family>& families) {
  std::vector<FamilyTag> menu;
  for (Family f : families) {
    if (f == Family::clayton || f == Family::gumbel) {
      for (int rot : {0, 90, 180, 270}) menu.push_back({f, rot});
    } else {
      menu.push_back({f, 0});
    }
  }
  return menu;
}

void simulate_pair(const BivariateCopula& cop, int n, stats::Rng& rng,
                   std::vector<double>& u, std::vector<double>& v) {
  u.resize(n);
  v.resize(n);
  for (int i = 0; i < n; ++i) {
    u[i] = rng.uniform();
    v[i] = cop.hinv1(u[i], rng.uniform());
  }
}

std::uint64_t fit_counter() {
  return g_fit_counter.load(std::memory_order_relaxed);
}

// --- serialization --------------------------------------------------------------

std::string BivariateCopula::to_json_string() const {
  nlohmann::json j;
  j["family"] = family_name(tag_.family);
  j["rotation"] = tag_.rotation;
  j["parameters"] = params_;
  return j.dump();
}

BivariateCopula BivariateCopula::from_json_string(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  FamilyTag tag;
  tag.family = family_from_name(j.at("family").get<std::string>());
  tag.rotation = j.at("rotation").get<int>();
  return BivariateCopula(tag, j.at("parameters").get<std::vector<double>>());
}

}  // namespace svine
