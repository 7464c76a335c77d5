#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "svine/bicop.hpp"
#include "svine/evaluator.hpp"
#include "svine/margins.hpp"
#include "svine/matrix.hpp"
#include "svine/vine.hpp"

namespace svine {

enum class MarginMode { parametric, semiparametric };

std::string margin_mode_name(MarginMode m);
MarginMode margin_mode_from_name(const std::string& name);

/// T x d matrix of PIT-scale observations, tagged with how they were produced.
struct PseudoSample {
  Matrix u;
  MarginMode mode = MarginMode::semiparametric;
};

struct ClassFit {
  std::string key;
  int level = 1;
  int lag_span = 0;
  int fit_order = 0;       // position in the fitting sequence
  double n_obs = 0.0;      // pooled observations across translated instances
  double loglik = 0.0;
  bool insufficient = false;  // forced to independence for lack of data
  bool tau_fallback = false;
};

struct FitDiagnostics {
  std::vector<ClassFit> class_fits;
  long clamped = 0;             // propagated h-values pushed back into (0,1)
  std::uint64_t pair_fits = 0;  // pair-copula fits performed
};

/// A fitted stationary vine copula model: structure, one copula per
/// translation class (independence on truncated classes), marginal models.
struct SVineModel {
  SVineSpec spec;
  std::map<std::string, BivariateCopula> copulas;
  std::vector<Margin> margins;  // empty: model lives on the copula scale
  MarginMode mode = MarginMode::semiparametric;
  int T = 0;
  double loglik = 0.0;
  double aic = 0.0;
  FitDiagnostics diagnostics;

  int dim() const { return spec.dim(); }
  int markov_order() const { return spec.markov_order; }
  int copula_param_count() const;
  int margin_param_count() const;

  std::string to_json_string() const;
  static SVineModel from_json_string(const std::string& json);
};

struct FitControl {
  std::vector<FamilyTag> menu = {FamilyTag{Family::gaussian, 0}};
  int min_class_obs = 10;
};

/// Step-wise MLE: trees in order, each translation class fitted to the pooled
/// h-transformed pairs of all its translated edge instances.
SVineModel fit_sequential(const PseudoSample& sample, const SVineSpec& spec,
                          const FitControl& control = {});

/// Joint pseudo-log-likelihood: every class counted once per translated edge
/// instance inside the observed window.
double model_loglik(const SVineModel& model, const PseudoSample& sample);

/// -2 loglik + 2 (copula parameters; marginal parameters too in parametric mode).
double model_aic(const SVineModel& model, const PseudoSample& sample);

/// Cross-section by tau-weighted maximum spanning trees; in/out permutations
/// greedily maximize lag-1 |tau| subject to compatibility.
SVineSpec select_structure(const PseudoSample& sample, int p,
                           const FitControl& control = {});

// --- end-to-end convenience -----------------------------------------------------

struct ModelBuildOptions {
  int markov_order = 1;
  MarginMode mode = MarginMode::parametric;
  std::vector<FamilyTag> menu = expand_family_menu(
      {Family::independence, Family::gaussian, Family::student_t,
       Family::clayton, Family::gumbel, Family::frank});
  std::optional<SVineSpec> structure;  // fixed structure instead of selection
};

/// Margins first, then pseudo-observations, structure selection (unless
/// fixed), and the step-wise copula fit.
SVineModel fit_model(const Matrix& data, const ModelBuildOptions& options);

/// PIT-transform a data matrix through the model's margins.
PseudoSample to_pseudo_sample(const Matrix& data, const SVineModel& model);

}  // namespace svine
