#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "svine/estimation.hpp"
#include "svine/forecast.hpp"
#include "svine/matrix.hpp"

namespace svine {

/// ell-dependent bootstrap weights with unit mean and variance:
/// xi_t = 1 + sum_j w_j Z_{t-j} with triangular-kernel weights normalized to
/// sum w_j^2 = 1; xi_t and xi_s are independent when |t - s| >= block.
struct MultiplierStream {
  std::vector<double> xi;
  int block = 1;
};

MultiplierStream gen_multipliers(int T, int block, std::uint64_t seed,
                                 std::uint64_t stream = 0);

/// Default block length max(1, floor(T^(1/3))).
int default_block(int T);

/// Flat parameter layout of a fitted model: marginal parameters first (only
/// in full parametric mode), then copula parameters in class-key order.
struct ParamLayout {
  struct Entry {
    bool is_margin = false;
    int margin_j = -1;   // 0-based column
    int sub_index = 0;   // parameter index within margin or copula
    std::string cls_key; // class key for copula entries
  };
  std::vector<Entry> entries;
  std::vector<double> point;  // fitted values, same order

  int size() const { return static_cast<int>(entries.size()); }
  std::vector<std::string> names() const;
};

ParamLayout param_layout(const SVineModel& model, bool include_margins);

struct ScoreJacobian {
  ParamLayout layout;
  Matrix phi;       // T x q per-time score rows at the fitted parameters
  Matrix jacobian;  // q x q
  std::vector<double> score_sum;  // column sums of phi (~ 0 at the optimum)
  bool ridged = false;
};

/// Finite-difference scores and Jacobian for the copula parameters, with the
/// pseudo-observations held fixed.
ScoreJacobian score_and_jacobian(const SVineModel& model,
                                 const PseudoSample& sample);

/// Parametric variant: marginal and copula parameters jointly; the
/// pseudo-observations are re-derived from the margins under perturbation.
ScoreJacobian score_and_jacobian_parametric(const SVineModel& model,
                                            const Matrix& data);

struct BootstrapResult {
  ParamLayout layout;
  Matrix replicates;      // R x q
  std::uint64_t refits = 0;  // pair-copula fits performed while replicating
  bool ridged = false;
};

/// One-step Newton-Raphson bootstrap replicates of the copula parameters.
/// In semiparametric mode each replicate re-evaluates the scores at
/// multiplier-bootstrapped empirical margins; otherwise the precomputed
/// scores are reweighted (no refits either way).
BootstrapResult bootstrap_params(const SVineModel& model,
                                 const PseudoSample& sample, int R, int block,
                                 std::uint64_t seed);

/// Fully parametric bootstrap of (margins, copulas) jointly.
BootstrapResult bootstrap_params_parametric(const SVineModel& model,
                                            const Matrix& data, int R,
                                            int block, std::uint64_t seed);

/// Rebuild a model with the replicate's parameters (clamped into each
/// family's domain).
SVineModel apply_replicate(const SVineModel& model, const ParamLayout& layout,
                           std::span<const double> values);

struct ForecastBand {
  Functional functional;
  Matrix lo, hi;           // horizon x d
  Matrix replicate_values; // R x (horizon*d) functional values
};

struct ForecastBands {
  std::vector<ForecastBand> bands;
  double nominal = 0.9;
};

/// Bootstrap bands for predictive functionals: each replicate re-simulates
/// the forecast from its perturbed model, conditioning on the same history.
ForecastBands bootstrap_forecast(const SVineModel& model,
                                 const PseudoSample& sample,
                                 const ForecastRequest& request, int R,
                                 int block, std::uint64_t seed,
                                 double nominal = 0.9);

}  // namespace svine
