#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace svine::stats {

inline constexpr double pi = 3.141592653589793238462643383279502884;

// --- univariate normal ---------------------------------------------------

double normal_pdf(double x);
double normal_cdf(double x);
/// Inverse of normal_cdf, accurate to ~1e-15 on (0,1).
double normal_quantile(double p);

// --- Student t (real nu > 0) ----------------------------------------------

double student_t_pdf(double x, double nu);
double student_t_cdf(double x, double nu);
double student_t_quantile(double p, double nu);

/// Cached per-nu constants for hot density loops.
struct StudentTConsts {
  double nu;
  double log_norm;  // lgamma((nu+1)/2) - lgamma(nu/2) - 0.5*log(nu*pi)
  explicit StudentTConsts(double nu_);
  double log_pdf(double x) const;
};

// --- special functions ----------------------------------------------------

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// Bivariate standard normal CDF P(X <= x, Y <= y) with correlation rho.
double bivariate_normal_cdf(double x, double y, double rho);

// --- quadrature -----------------------------------------------------------

struct QuadratureRule {
  std::vector<double> nodes;    // on [0, 1]
  std::vector<double> weights;  // sum to 1
};

/// Gauss-Legendre rule with n points, mapped to [0, 1]. Cached per n.
const QuadratureRule& gauss_legendre(int n);

/// Adaptive quadrature of f on [a, b] to absolute tolerance tol.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-12);

// --- scalar optimization --------------------------------------------------

struct BrentResult {
  double x;
  double fx;
  int iterations;
};

/// Minimize f on [a, b] by Brent's method (golden section + parabolic).
BrentResult brent_minimize(const std::function<double(double)>& f, double a,
                           double b, double tol = 1e-8, int max_iter = 200);

/// Solve f(x) = 0 on a bracketing interval [a, b] by bisection + secant.
double solve_bracketed(const std::function<double(double)>& f, double a,
                       double b, double tol = 1e-12, int max_iter = 200);

struct NelderMeadResult {
  std::vector<double> x;
  double fx;
  int iterations;
  bool converged;
};

NelderMeadResult nelder_mead(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x0, double step = 0.1, double ftol = 1e-10,
    int max_iter = 2000);

// --- rank and test statistics ----------------------------------------------

/// Kendall's tau-b in O(n log n) (Knight's algorithm, tie-corrected).
double kendall_tau(std::span<const double> x, std::span<const double> y);

/// One-sample Kolmogorov-Smirnov distance against Uniform(0,1).
double ks_uniform_statistic(std::vector<double> sample);

/// Two-sample Kolmogorov-Smirnov distance.
double ks_two_sample_statistic(std::vector<double> a, std::vector<double> b);

/// Asymptotic KS critical value: c(alpha) with c(0.01) = 1.628, c(0.05) = 1.358.
double ks_critical(double alpha);

/// Empirical quantile with linear interpolation (type 7). sorted must be sorted.
double sample_quantile_sorted(std::span<const double> sorted, double alpha);
double sample_quantile(std::vector<double> values, double alpha);

double mean(std::span<const double> x);
double variance(std::span<const double> x);
double median(std::vector<double> values);

/// Autocovariance of x at the given lag (biased, 1/n normalization).
double autocovariance(std::span<const double> x, int lag);

// --- deterministic RNG ------------------------------------------------------

/// Counter-based generator: the stream for (seed, stream_id) is reproducible
/// and independent of scheduling. Uniforms never touch 0 or 1.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);
  std::uint64_t next_u64();
  double uniform();              // (0, 1)
  double normal();               // inverse-CDF, fully deterministic
  int uniform_int(int n);        // {0, ..., n-1}

 private:
  std::uint64_t state_;
};

}  // namespace svine::stats
