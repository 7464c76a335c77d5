#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "svine/estimation.hpp"
#include "svine/matrix.hpp"

namespace svine {

/// Rolling out-of-sample evaluation: refit every `stride` steps on the
/// trailing `window` rows, forecast the cumulative portfolio return over the
/// horizon at every step, and score against the realized value.
struct BacktestConfig {
  int window = 756;
  int stride = 126;
  int horizon_steps = 1;  // 1 = day, 5 = week
  int n_sims = 1000;
  std::vector<std::string> measures = {"CRPS", "logS", "VaR95", "VaR99"};
  int n_portfolios = 1000;
  double weight_low = -0.15;
  double weight_high = 0.25;
  ModelBuildOptions model;
  std::uint64_t seed = 1;
};

struct BacktestRow {
  std::string measure;
  double mean = 0.0;
  double se = 0.0;  // adjusted for 30 lags of autocovariance
  int n = 0;
};

struct BacktestResult {
  std::vector<BacktestRow> rows;
  Matrix step_scores;  // n_steps x measures, portfolio-averaged
  std::vector<std::string> measure_names;
  int refits = 0;
};

BacktestResult run_backtest(const Matrix& data, const BacktestConfig& config);

}  // namespace svine
