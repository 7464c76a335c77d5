#include "svine/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "svine/threading.hpp"

namespace svine {

std::string Functional::name() const {
  if (kind == Kind::mean) return "mean";
  return "q" + std::to_string(alpha);
}

namespace {

double to_data_scale(const SVineModel& model, int j, double u) {
  return model.margins.empty() ? u : model.margins[j].quantile(u);
}

double history_to_copula_scale(const SVineModel& model, int j, double x) {
  return model.margins.empty() ? clamp_unit(x)
                               : clamp_unit(model.margins[j].cdf(x));
}

}  // namespace

Matrix simulate_unconditional(const SVineModel& model, int T_out,
                              std::uint64_t seed) {
  if (T_out < 1) throw std::domain_error("simulate: T_out must be >= 1");
  const int d = model.dim();
  const int W = model.markov_order() + 1;
  WindowVine wv(model.spec, W);
  wv.bind(model.copulas);
  stats::Rng rng(seed, 0);

  Matrix out(T_out, d);
  WindowState st(wv);
  // first window drawn jointly via the full inverse Rosenblatt
  const int first = std::min(W, T_out);
  for (int pos = 0; pos < W * d; ++pos) st.sample_var(pos, rng.uniform());
  for (int w = 1; w <= first; ++w) {
    for (int j = 1; j <= d; ++j) {
      out.at(w - 1, j - 1) =
          to_data_scale(model, j - 1, st.var(wv.var_index(w, j)));
    }
  }
  for (int t = W + 1; t <= T_out; ++t) {
    st.shift();
    for (int r = 0; r < d; ++r) {
      st.sample_var((W - 1) * d + r, rng.uniform());
    }
    for (int j = 1; j <= d; ++j) {
      out.at(t - 1, j - 1) =
          to_data_scale(model, j - 1, st.var(wv.var_index(W, j)));
    }
  }
  return out;
}

Matrix simulate_conditional(const SVineModel& model, const Matrix& history,
                            int horizon, int n_sims, std::uint64_t seed) {
  const int d = model.dim();
  const int p = model.markov_order();
  if (horizon < 1 || n_sims < 1) {
    throw std::domain_error("simulate_conditional: need horizon, N >= 1");
  }
  if (p > 0 && (history.rows != p || history.cols != d)) {
    throw std::invalid_argument(
        "simulate_conditional: history must have exactly p rows and d columns");
  }
  const int W = p + 1;
  WindowVine wv(model.spec, W);
  wv.bind(model.copulas);

  // PIT the history once and pre-compute its h-value stack
  WindowState base(wv);
  for (int w = 1; w <= p; ++w) {
    for (int j = 1; j <= d; ++j) {
      base.set_var(wv.var_index(w, j),
                   history_to_copula_scale(model, j - 1, history.at(w - 1, j - 1)));
    }
  }
  // force every history-only h-value now so replicates share the work
  {
    int gid = 0;
    for (int k = 1; k <= wv.vine().num_trees(); ++k) {
      for (const VineEdge& e : wv.vine().tree(k)) {
        if (e.complete_union.back().time <= p) {
          base.val_a(gid);
          base.val_b(gid);
        }
        ++gid;
      }
    }
  }

  Matrix out(n_sims, horizon * d);
  parallel_for(n_sims, [&](int r) {
    WindowState st = base;
    stats::Rng rng(seed, static_cast<std::uint64_t>(r) + 1);
    for (int step = 0; step < horizon; ++step) {
      for (int jr = 0; jr < d; ++jr) {
        st.sample_var((W - 1) * d + jr, rng.uniform());
      }
      for (int j = 1; j <= d; ++j) {
        out.at(r, step * d + (j - 1)) =
            to_data_scale(model, j - 1, st.var(wv.var_index(W, j)));
      }
      if (step + 1 < horizon) st.shift();
    }
  });
  return out;
}

ForecastResult forecast(const SVineModel& model, const ForecastRequest& req) {
  ForecastResult res;
  res.horizon = req.horizon;
  res.dim = model.dim();
  res.functionals = req.functionals;
  res.simulations = simulate_conditional(model, req.history, req.horizon,
                                         req.n_sims, req.seed);
  for (const Functional& f : req.functionals) {
    Matrix m(req.horizon, model.dim());
    std::vector<double> col(req.n_sims);
    for (int c = 0; c < req.horizon * model.dim(); ++c) {
      for (int r = 0; r < req.n_sims; ++r) col[r] = res.simulations.at(r, c);
      m.at(c / model.dim(), c % model.dim()) = predict_functional(col, f);
    }
    res.point.push_back(std::move(m));
  }
  return res;
}

double predict_functional(std::span<const double> sample, const Functional& f) {
  if (sample.empty()) {
    throw std::invalid_argument("predict_functional: empty sample");
  }
  if (f.kind == Functional::Kind::mean) return stats::mean(sample);
  if (!(f.alpha > 0.0 && f.alpha < 1.0)) {
    throw std::domain_error("predict_functional: quantile level outside (0,1)");
  }
  return stats::sample_quantile(
      std::vector<double>(sample.begin(), sample.end()), f.alpha);
}

double crps_sample(std::vector<double> sample, double realized) {
  if (sample.empty()) throw std::invalid_argument("crps: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double abs_err = 0.0, spread = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    abs_err += std::fabs(sample[i] - realized);
    spread += sample[i] * (2.0 * static_cast<double>(i) - n + 1.0);
  }
  return abs_err / n - spread / (n * n);
}

double log_score_sample(const std::vector<double>& sample, double realized) {
  if (sample.empty()) throw std::invalid_argument("logS: empty sample");
  const double n = static_cast<double>(sample.size());
  const double sd = sample.size() > 1 ? std::sqrt(stats::variance(sample)) : 0.0;
  std::vector<double> sorted = sample;
  std::sort(sorted.begin(), sorted.end());
  const double iqr = stats::sample_quantile_sorted(sorted, 0.75) -
                     stats::sample_quantile_sorted(sorted, 0.25);
  double h = 0.9 * std::min(sd, iqr / 1.34) * std::pow(n, -0.2);
  if (!(h > 0.0)) h = std::max(1e-8, 1e-8 * std::fabs(realized));
  double dens = 0.0;
  for (double x : sample) dens += stats::normal_pdf((realized - x) / h);
  dens /= n * h;
  return -std::log(std::max(dens, 1e-300));
}

double check_loss(double realized, double predicted_quantile, double alpha) {
  const double u = realized - predicted_quantile;
  return u * (alpha - (u < 0.0 ? 1.0 : 0.0));
}

std::map<std::string, double> score_forecasts(
    const std::vector<std::vector<double>>& samples,
    std::span<const double> realized,
    const std::vector<std::string>& measures) {
  if (samples.size() != realized.size() || samples.empty()) {
    throw std::invalid_argument("score_forecasts: need one sample per outcome");
  }
  std::map<std::string, double> out;
  for (const std::string& m : measures) {
    double acc = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].empty()) {
        throw std::invalid_argument("score_forecasts: empty sample");
      }
      if (m == "CRPS") {
        acc += crps_sample(samples[i], realized[i]);
      } else if (m == "logS") {
        acc += log_score_sample(samples[i], realized[i]);
      } else if (m == "VaR95" || m == "VaR99") {
        const double alpha = m == "VaR95" ? 0.05 : 0.01;
        const double q = stats::sample_quantile(samples[i], alpha);
        acc += check_loss(realized[i], q, alpha);
      } else {
        throw std::domain_error("score_forecasts: unknown measure " + m);
      }
    }
    out[m] = acc / static_cast<double>(samples.size());
  }
  return out;
}

}  // namespace svine
