#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "svine/stats.hpp"

namespace svine {

/// Scale-splitting (Fernandez-Steel) skew-t in centered form: mu is the mean,
/// sigma > 0 the standard deviation, nu > 2 the tail index, gamma > 0 the
/// skewness (gamma = 1 recovers a rescaled symmetric t).
struct SkewTParams {
  double mu = 0.0;
  double sigma = 1.0;
  double nu = 10.0;
  double gamma = 1.0;

  double log_pdf(double x) const;
  double pdf(double x) const;
  double cdf(double x) const;
  double quantile(double u) const;
};

/// Rescaled empirical margin: G(x) = #{X_t <= x} / (T + 1); the quantile
/// interpolates linearly between order statistics with flat extrapolation.
class EmpiricalMargin {
 public:
  EmpiricalMargin() = default;
  explicit EmpiricalMargin(std::vector<double> sample);

  double cdf(double x) const;
  double quantile(double u) const;
  const std::vector<double>& sorted_sample() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

struct MarginFitReport {
  bool converged = true;
  int fallbacks = 0;  // 0 = skew-t, 1 = symmetric t, 2 = normal
  double loglik = 0.0;
};

/// Marginal skew-t MLE (Nelder-Mead on the unconstrained reparameterization);
/// falls back to a symmetric-t fit, then to a normal fit, with a warning flag.
SkewTParams fit_margin_mle(std::span<const double> series,
                           MarginFitReport* report = nullptr);

/// One fitted margin, parametric or empirical.
struct Margin {
  std::variant<SkewTParams, EmpiricalMargin> model;

  bool parametric() const {
    return std::holds_alternative<SkewTParams>(model);
  }
  int param_count() const { return parametric() ? 4 : 0; }
  double cdf(double x) const;
  double quantile(double u) const;

  std::string to_json_string() const;
  static Margin from_json_string(const std::string& json);
};

/// Probability integral transform of a series through a fitted margin;
/// results are clamped into the open unit interval.
std::vector<double> pit(std::span<const double> series, const Margin& margin);

}  // namespace svine
