#include "svine/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "svine/forecast.hpp"

namespace svine {

namespace {

// standard error adjusted by the first `max_lag` autocovariances
double adjusted_se(const std::vector<double>& x, int max_lag) {
  const int n = static_cast<int>(x.size());
  if (n < 2) return 0.0;
  const double g0 = stats::autocovariance(x, 0);
  double lrv = g0;
  for (int l = 1; l <= std::min(max_lag, n - 1); ++l) {
    lrv += 2.0 * stats::autocovariance(x, l);
  }
  if (lrv <= 0.0) lrv = g0;
  return std::sqrt(lrv / static_cast<double>(n));
}

}  // namespace

BacktestResult run_backtest(const Matrix& data, const BacktestConfig& config) {
  const int T = data.rows, d = data.cols;
  const int h = config.horizon_steps;
  if (config.n_portfolios < 1) {
    throw std::domain_error("backtest: need at least one portfolio");
  }
  if (config.stride < 1) throw std::domain_error("backtest: stride must be >= 1");
  if (config.window + h > T) {
    throw std::domain_error("backtest: window plus horizon exceeds the series");
  }

  // portfolio weights: d-1 uniform draws, last one closes the sum to one
  std::vector<std::vector<double>> weights(config.n_portfolios,
                                           std::vector<double>(d));
  for (int i = 0; i < config.n_portfolios; ++i) {
    stats::Rng rng(config.seed, 0x504F5254ULL + static_cast<std::uint64_t>(i));
    double sum = 0.0;
    for (int j = 0; j + 1 < d; ++j) {
      weights[i][j] = config.weight_low +
                      (config.weight_high - config.weight_low) * rng.uniform();
      sum += weights[i][j];
    }
    weights[i][d - 1] = 1.0 - sum;
  }

  const int p = config.model.markov_order;
  const int first_origin = config.window - 1;       // 0-based row index
  const int last_origin = T - 1 - h;
  const int n_steps = last_origin - first_origin + 1;
  if (n_steps < 1) throw std::domain_error("backtest: window exhausted");

  BacktestResult res;
  res.measure_names = config.measures;
  res.step_scores = Matrix(n_steps, static_cast<int>(config.measures.size()));

  SVineModel model;
  bool have_model = false;
  std::vector<double> sample(config.n_sims);
  for (int o = first_origin; o <= last_origin; ++o) {
    if ((o - first_origin) % config.stride == 0 || !have_model) {
      Matrix win(config.window, d);
      for (int r = 0; r < config.window; ++r) {
        for (int c = 0; c < d; ++c) {
          win.at(r, c) = data.at(o - config.window + 1 + r, c);
        }
      }
      model = fit_model(win, config.model);
      have_model = true;
      ++res.refits;
    }
    Matrix history(p, d);
    for (int r = 0; r < p; ++r) {
      for (int c = 0; c < d; ++c) history.at(r, c) = data.at(o - p + 1 + r, c);
    }
    const std::uint64_t sim_seed =
        stats::Rng(config.seed, 0x53544550ULL + static_cast<std::uint64_t>(o))
            .next_u64();
    const Matrix sims =
        simulate_conditional(model, history, h, config.n_sims, sim_seed);

    // cumulative return per replicate, per variable
    Matrix cum(config.n_sims, d);
    for (int i = 0; i < config.n_sims; ++i) {
      for (int c = 0; c < d; ++c) {
        double s = 0.0;
        for (int step = 0; step < h; ++step) s += sims.at(i, step * d + c);
        cum.at(i, c) = s;
      }
    }
    std::vector<double> realized_cum(d, 0.0);
    for (int step = 1; step <= h; ++step) {
      for (int c = 0; c < d; ++c) realized_cum[c] += data.at(o + step, c);
    }

    std::vector<double> acc(config.measures.size(), 0.0);
    for (const auto& w : weights) {
      double realized = 0.0;
      for (int c = 0; c < d; ++c) realized += w[c] * realized_cum[c];
      for (int i = 0; i < config.n_sims; ++i) {
        double s = 0.0;
        for (int c = 0; c < d; ++c) s += w[c] * cum.at(i, c);
        sample[i] = s;
      }
      for (std::size_t m = 0; m < config.measures.size(); ++m) {
        const std::string& name = config.measures[m];
        if (name == "CRPS") {
          acc[m] += crps_sample(sample, realized);
        } else if (name == "logS") {
          acc[m] += log_score_sample(sample, realized);
        } else if (name == "VaR95" || name == "VaR99") {
          const double alpha = name == "VaR95" ? 0.05 : 0.01;
          const double q = stats::sample_quantile(sample, alpha);
          acc[m] += check_loss(realized, q, alpha);
        } else {
          throw std::domain_error("backtest: unknown measure " + name);
        }
      }
    }
    for (std::size_t m = 0; m < config.measures.size(); ++m) {
      res.step_scores.at(o - first_origin, static_cast<int>(m)) =
          acc[m] / static_cast<double>(config.n_portfolios);
    }
  }

  for (std::size_t m = 0; m < config.measures.size(); ++m) {
    std::vector<double> col(n_steps);
    for (int r = 0; r < n_steps; ++r) col[r] = res.step_scores.at(r, static_cast<int>(m));
    BacktestRow row;
    row.measure = config.measures[m];
    row.mean = stats::mean(col);
    row.se = adjusted_se(col, 30);
    row.n = n_steps;
    res.rows.push_back(std::move(row));
  }
  return res;
}

}  // namespace svine
