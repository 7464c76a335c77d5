#include "svine/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace svine::stats {

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * pi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

// Acklam's rational approximation, then two Halley refinements with the
// erfc-based CDF. The refinement brings the result to full double precision.
double normal_quantile_acklam(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double q, r, x;
  if (p < p_low) {
    q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    q = p - 0.5;
    r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  return x;
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("normal_quantile: p must lie in (0,1)");
  }
  double x = normal_quantile_acklam(p);
  for (int i = 0; i < 2; ++i) {
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

// --- incomplete beta --------------------------------------------------------

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_cf(double a, double b, double x) {
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  const double fpmin = 1e-300;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double lbt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                     a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(lbt);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return bt * beta_cf(a, b, x) / a;
  }
  return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

// --- Student t ---------------------------------------------------------------

StudentTConsts::StudentTConsts(double nu_)
    : nu(nu_),
      log_norm(std::lgamma(0.5 * (nu_ + 1.0)) - std::lgamma(0.5 * nu_) -
               0.5 * std::log(nu_ * pi)) {}

double StudentTConsts::log_pdf(double x) const {
  return log_norm - 0.5 * (nu + 1.0) * std::log1p(x * x / nu);
}

double student_t_pdf(double x, double nu) {
  return std::exp(StudentTConsts(nu).log_pdf(x));
}

double student_t_cdf(double x, double nu) {
  if (x == 0.0) return 0.5;
  const double p = 0.5 * incomplete_beta(0.5 * nu, 0.5, nu / (nu + x * x));
  return x > 0.0 ? 1.0 - p : p;
}

double student_t_quantile(double p, double nu) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("student_t_quantile: p must lie in (0,1)");
  }
  if (p == 0.5) return 0.0;
  // Start from the scaled normal quantile, then safeguarded Newton.
  const double scale = nu > 2.0 ? std::sqrt(nu / (nu - 2.0)) : 1.5;
  double x = normal_quantile(p) * scale;
  double lo = -1e308, hi = 1e308;
  const StudentTConsts tc(nu);
  for (int i = 0; i < 100; ++i) {
    const double f = student_t_cdf(x, nu) - p;
    if (f > 0.0) {
      hi = std::min(hi, x);
    } else {
      lo = std::max(lo, x);
    }
    const double dens = std::exp(tc.log_pdf(x));
    double step = dens > 1e-300 ? f / dens : 0.0;
    double xn = x - step;
    if (!(xn > lo && xn < hi) || step == 0.0) {
      // fall back to bisection within the maintained bracket
      if (lo == -1e308) {
        xn = x - std::max(1.0, std::fabs(x));
      } else if (hi == 1e308) {
        xn = x + std::max(1.0, std::fabs(x));
      } else {
        xn = 0.5 * (lo + hi);
      }
    }
    if (std::fabs(xn - x) <= 1e-14 * std::max(1.0, std::fabs(x))) {
      x = xn;
      break;
    }
    x = xn;
  }
  return x;
}

// --- bivariate normal CDF -----------------------------------------------------

double bivariate_normal_cdf(double x, double y, double rho) {
  if (!(rho > -1.0 && rho < 1.0)) {
    throw std::domain_error("bivariate_normal_cdf: |rho| must be < 1");
  }
  if (rho == 0.0) return normal_cdf(x) * normal_cdf(y);
  // Correlation-integral representation; the integrand is smooth in t.
  auto f = [&](double t) {
    const double om = 1.0 - t * t;
    return std::exp(-(x * x - 2.0 * t * x * y + y * y) / (2.0 * om)) /
           std::sqrt(om);
  };
  const double integral =
      rho > 0.0 ? integrate(f, 0.0, rho, 1e-14) : -integrate(f, rho, 0.0, 1e-14);
  return normal_cdf(x) * normal_cdf(y) + integral / (2.0 * pi);
}

// --- quadrature ----------------------------------------------------------------

const QuadratureRule& gauss_legendre(int n) {
  static std::map<int, QuadratureRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Newton iteration for the i-th root of P_n on [-1, 1].
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p0 / pp;
      if (std::fabs(z - z1) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.nodes[i] = 0.5 * (1.0 - z);
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + z);
    rule.weights[i] = 0.5 * w;
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  auto [ins, ok] = cache.emplace(n, std::move(rule));
  return ins->second;
}

namespace {

double quad_on(const std::function<double(double)>& f, double a, double b,
               const QuadratureRule& rule) {
  const double len = b - a;
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    s += rule.weights[i] * f(a + len * rule.nodes[i]);
  }
  return s * len;
}

double integrate_rec(const std::function<double(double)>& f, double a, double b,
                     double tol, int depth, const QuadratureRule& g7,
                     const QuadratureRule& g15) {
  const double coarse = quad_on(f, a, b, g7);
  const double fine = quad_on(f, a, b, g15);
  // stop at the requested accuracy, at rounding noise, or on tiny intervals
  const double noise = 1e-15 * (std::fabs(fine) + (b - a));
  if (std::fabs(fine - coarse) <= std::max(tol, noise) || depth >= 30 ||
      (b - a) <= 1e-13 * (1.0 + std::fabs(a) + std::fabs(b))) {
    return fine;
  }
  const double mid = 0.5 * (a + b);
  return integrate_rec(f, a, mid, 0.5 * tol, depth + 1, g7, g15) +
         integrate_rec(f, mid, b, 0.5 * tol, depth + 1, g7, g15);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  if (a >= b) return 0.0;
  // start from several panels so narrow features cannot hide between nodes
  const int panels = 8;
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int i = 0; i < panels; ++i) {
    total += integrate_rec(f, a + i * h, a + (i + 1) * h, tol / panels, 0,
                           gauss_legendre(7), gauss_legendre(15));
  }
  return total;
}

// --- Brent minimization ----------------------------------------------------------

BrentResult brent_minimize(const std::function<double(double)>& f, double a,
                           double b, double tol, int max_iter) {
  const double golden = 0.3819660112501051;
  double x = a + golden * (b - a);
  double w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    const double xm = 0.5 * (a + b);
    const double tol1 = tol * std::fabs(x) + 1e-12;
    const double tol2 = 2.0 * tol1;
    if (std::fabs(x - xm) <= tol2 - 0.5 * (b - a)) break;
    bool use_golden = true;
    if (std::fabs(e) > tol1) {
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::fabs(q);
      const double etemp = e;
      e = d;
      if (std::fabs(p) < std::fabs(0.5 * q * etemp) && p > q * (a - x) &&
          p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (xm > x ? tol1 : -tol1);
        use_golden = false;
      }
    }
    if (use_golden) {
      e = (x >= xm ? a - x : b - x);
      d = golden * e;
    }
    const double u = std::fabs(d) >= tol1 ? x + d : x + (d > 0 ? tol1 : -tol1);
    const double fu = f(u);
    if (fu <= fx) {
      if (u >= x) {
        a = x;
      } else {
        b = x;
      }
      v = w;
      fv = fw;
      w = x;
      fw = fx;
      x = u;
      fx = fu;
    } else {
      if (u < x) {
        a = u;
      } else {
        b = u;
      }
      if (fu <= fw || w == x) {
        v = w;
        fv = fw;
        w = u;
        fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u;
        fv = fu;
      }
    }
  }
  return {x, fx, iter};
}

double solve_bracketed(const std::function<double(double)>& f, double a,
                       double b, double tol, int max_iter) {
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (fa * fb > 0.0) {
    throw std::runtime_error("solve_bracketed: interval does not bracket a root");
  }
  double lo = a, hi = b, flo = fa;
  for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
    const double x = 0.5 * (lo + hi);
    const double fx = f(x);
    if (fx == 0.0) return x;
    if (flo * fx < 0.0) {
      hi = x;
    } else {
      lo = x;
      flo = fx;
    }
  }
  return 0.5 * (lo + hi);
}

// --- Nelder-Mead --------------------------------------------------------------

NelderMeadResult nelder_mead(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x0, double step, double ftol, int max_iter) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> simplex(n + 1,
                                           std::vector<double>(x0.begin(), x0.end()));
  for (std::size_t i = 0; i < n; ++i) {
    simplex[i + 1][i] += (simplex[i + 1][i] != 0.0)
                             ? step * std::fabs(simplex[i + 1][i])
                             : step;
  }
  std::vector<double> fvals(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fvals[i] = f(simplex[i]);

  auto order = [&]() {
    std::vector<std::size_t> idx(n + 1);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });
    std::vector<std::vector<double>> s2(n + 1);
    std::vector<double> f2(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      s2[i] = simplex[idx[i]];
      f2[i] = fvals[idx[i]];
    }
    simplex.swap(s2);
    fvals.swap(f2);
  };

  int iter = 0;
  bool converged = false;
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  for (; iter < max_iter; ++iter) {
    order();
    if (std::fabs(fvals[n] - fvals[0]) <=
        ftol * (std::fabs(fvals[0]) + std::fabs(fvals[n]) + 1e-30)) {
      converged = true;
      break;
    }
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += simplex[i][j];
      centroid[j] = s / n;
    }
    for (std::size_t j = 0; j < n; ++j) {
      xr[j] = centroid[j] + (centroid[j] - simplex[n][j]);
    }
    const double fr = f(xr);
    if (fr < fvals[0]) {
      for (std::size_t j = 0; j < n; ++j) {
        xe[j] = centroid[j] + 2.0 * (centroid[j] - simplex[n][j]);
      }
      const double fe = f(xe);
      if (fe < fr) {
        simplex[n] = xe;
        fvals[n] = fe;
      } else {
        simplex[n] = xr;
        fvals[n] = fr;
      }
    } else if (fr < fvals[n - 1]) {
      simplex[n] = xr;
      fvals[n] = fr;
    } else {
      for (std::size_t j = 0; j < n; ++j) {
        xc[j] = centroid[j] + 0.5 * (simplex[n][j] - centroid[j]);
      }
      const double fc = f(xc);
      if (fc < fvals[n]) {
        simplex[n] = xc;
        fvals[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
          }
          fvals[i] = f(simplex[i]);
        }
      }
    }
  }
  order();
  return {simplex[0], fvals[0], iter, converged};
}

// --- rank statistics --------------------------------------------------------------

namespace {

// counts swaps needed to sort y (merge sort), i.e. discordant-ish pairs
std::uint64_t merge_count(std::vector<double>& y, std::vector<double>& buf,
                          std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t cnt = merge_count(y, buf, lo, mid) + merge_count(y, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (y[j] < y[i]) {
      cnt += mid - i;
      buf[k++] = y[j++];
    } else {
      buf[k++] = y[i++];
    }
  }
  while (i < mid) buf[k++] = y[i++];
  while (j < hi) buf[k++] = y[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, y.begin() + lo);
  return cnt;
}

std::uint64_t tie_pairs(const std::vector<double>& sorted_keys) {
  std::uint64_t total = 0;
  std::size_t i = 0;
  while (i < sorted_keys.size()) {
    std::size_t j = i + 1;
    while (j < sorted_keys.size() && sorted_keys[j] == sorted_keys[i]) ++j;
    const std::uint64_t t = j - i;
    total += t * (t - 1) / 2;
    i = j;
  }
  return total;
}

}  // namespace

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) {
    throw std::invalid_argument("kendall_tau: need two equal-length series, n >= 2");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];

  // tied-x pair count n1 and joint ties n3
  std::uint64_t n1 = 0, n3 = 0;
  {
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i + 1;
      while (j < n && x[idx[j]] == x[idx[i]]) ++j;
      const std::uint64_t t = j - i;
      n1 += t * (t - 1) / 2;
      std::size_t a = i;
      while (a < j) {
        std::size_t b = a + 1;
        while (b < j && ys[b] == ys[a]) ++b;
        const std::uint64_t tt = b - a;
        n3 += tt * (tt - 1) / 2;
        a = b;
      }
      i = j;
    }
  }
  std::vector<double> y_for_ties = ys;
  std::sort(y_for_ties.begin(), y_for_ties.end());
  const std::uint64_t n2 = tie_pairs(y_for_ties);

  std::vector<double> buf(n);
  const std::uint64_t swaps = merge_count(ys, buf, 0, n);

  const double n0 = 0.5 * static_cast<double>(n) * (n - 1);
  const double num = n0 - static_cast<double>(n1) - static_cast<double>(n2) +
                     static_cast<double>(n3) - 2.0 * static_cast<double>(swaps);
  const double den = std::sqrt((n0 - static_cast<double>(n1)) *
                               (n0 - static_cast<double>(n2)));
  if (den == 0.0) return 0.0;
  return num / den;
}

double ks_uniform_statistic(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double fi = sample[i];
    d = std::max(d, std::fabs((i + 1) / n - fi));
    d = std::max(d, std::fabs(fi - i / n));
  }
  return d;
}

double ks_two_sample_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::fabs(i / na - j / nb));
  }
  return d;
}

double ks_critical(double alpha) {
  // K(c) = 1 - alpha for the Kolmogorov distribution; solve via its series.
  auto kolmogorov = [](double c) {
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
      s += (k % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * c * c);
    }
    return 1.0 - 2.0 * s;
  };
  return solve_bracketed([&](double c) { return kolmogorov(c) - (1.0 - alpha); },
                         0.2, 3.0, 1e-10);
}

double sample_quantile_sorted(std::span<const double> sorted, double alpha) {
  if (sorted.empty()) {
    throw std::invalid_argument("sample_quantile: empty sample");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("sample_quantile: alpha must lie in (0,1)");
  }
  const double h = (static_cast<double>(sorted.size()) - 1.0) * alpha;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double w = h - static_cast<double>(lo);
  return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

double sample_quantile(std::vector<double> values, double alpha) {
  std::sort(values.begin(), values.end());
  return sample_quantile_sorted(values, alpha);
}

double mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean: empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("variance: need n >= 2");
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / (static_cast<double>(x.size()) - 1.0);
}

double median(std::vector<double> values) {
  return sample_quantile(std::move(values), 0.5);
}

double autocovariance(std::span<const double> x, int lag) {
  const int n = static_cast<int>(x.size());
  if (lag < 0 || lag >= n) {
    throw std::invalid_argument("autocovariance: lag out of range");
  }
  const double m = mean(x);
  double s = 0.0;
  for (int t = 0; t + lag < n; ++t) s += (x[t] - m) * (x[t + lag] - m);
  return s / static_cast<double>(n);
}

// --- RNG --------------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  const std::uint64_t k1 = splitmix64(s);
  s = stream ^ 0xD1B54A32D192ED03ULL;
  const std::uint64_t k2 = splitmix64(s);
  state_ = k1 ^ (k2 + 0x2545F4914F6CDD1DULL);
  // warm-up
  splitmix64(state_);
}

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::uniform() {
  // 53-bit mantissa, offset by half an ulp: result lies strictly in (0,1)
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() { return normal_quantile(uniform()); }

int Rng::uniform_int(int n) {
  return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
}

}  // namespace svine::stats
