#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "svine/estimation.hpp"
#include "svine/matrix.hpp"

namespace svine {

/// A functional of the predictive distribution.
struct Functional {
  enum class Kind { mean, quantile };
  Kind kind = Kind::mean;
  double alpha = 0.5;  // quantile level

  static Functional mean() { return {Kind::mean, 0.0}; }
  static Functional quantile(double a) { return {Kind::quantile, a}; }
  std::string name() const;
};

struct ForecastRequest {
  Matrix history;  // exactly p rows, d columns, data scale
  int horizon = 1;
  int n_sims = 1000;
  std::vector<Functional> functionals = {Functional::mean()};
  std::uint64_t seed = 1;
};

struct ForecastResult {
  Matrix simulations;  // n_sims x (horizon * d)
  int horizon = 1;
  int dim = 1;
  /// point[f] is a horizon x d matrix of the f-th functional's estimates
  std::vector<Matrix> point;
  std::vector<Functional> functionals;
};

/// Path of length T_out from the stationary model: the first Markov window is
/// drawn jointly, each further step rolls the h-value stack and draws d new
/// uniforms. Deterministic per seed.
Matrix simulate_unconditional(const SVineModel& model, int T_out,
                              std::uint64_t seed);

/// N iid forecast paths given the last p observations. The history's h-value
/// stack is computed once; replicate r uses the stream (seed, r).
Matrix simulate_conditional(const SVineModel& model, const Matrix& history,
                            int horizon, int n_sims, std::uint64_t seed);

ForecastResult forecast(const SVineModel& model, const ForecastRequest& req);

/// Monte-Carlo estimate of a functional from a scalar sample.
double predict_functional(std::span<const double> sample, const Functional& f);

/// Proper scores averaged over forecast cases. Supported measures:
/// CRPS (sample energy form), logS (Gaussian-kernel density, Silverman
/// bandwidth), VaR95 / VaR99 (check loss at the 5% / 1% predicted quantile).
std::map<std::string, double> score_forecasts(
    const std::vector<std::vector<double>>& samples,
    std::span<const double> realized, const std::vector<std::string>& measures);

/// Single-case scores (used by the backtest loop).
double crps_sample(std::vector<double> sample, double realized);
double log_score_sample(const std::vector<double>& sample, double realized);
double check_loss(double realized, double predicted_quantile, double alpha);

}  // namespace svine
