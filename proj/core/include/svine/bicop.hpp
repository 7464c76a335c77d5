#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "svine/stats.hpp"

namespace svine {

enum class Family : int {
  independence = 0,
  gaussian = 1,
  student_t = 2,
  clayton = 3,
  gumbel = 4,
  frank = 5,
};

std::string family_name(Family f);
Family family_from_name(const std::string& name);

/// Family plus rotation. Rotations are only meaningful for the asymmetric
/// families (Clayton, Gumbel); the reflection-closed ones are pinned to 0.
struct FamilyTag {
  Family family = Family::independence;
  int rotation = 0;  // one of 0, 90, 180, 270

  bool operator==(const FamilyTag&) const = default;
};

/// Number of parameters for a family (0, 1 or 2).
int family_param_count(Family f);

/// A parametric bivariate copula. Immutable after construction; all
/// evaluations are pure and safe to call concurrently.
class BivariateCopula {
 public:
  BivariateCopula();  // independence
  BivariateCopula(FamilyTag tag, std::vector<double> params);

  const FamilyTag& tag() const { return tag_; }
  const std::vector<double>& params() const { return params_; }
  bool is_independence() const { return tag_.family == Family::independence; }
  int param_count() const { return static_cast<int>(params_.size()); }

  double pdf(double u, double v) const;
  double log_pdf(double u, double v) const;
  double cdf(double u, double v) const;

  /// hfunc1(u, v) = P(V <= v | U = u), hfunc2(u, v) = P(U <= u | V = v).
  double hfunc1(double u, double v) const;
  double hfunc2(double u, double v) const;
  /// hinv1(u, w) solves hfunc1(u, v) = w for v; hinv2(w, v) likewise for u.
  double hinv1(double u, double w) const;
  double hinv2(double w, double v) const;

  /// Population Kendall's tau of this copula.
  double kendall_tau() const;

  std::string to_json_string() const;
  static BivariateCopula from_json_string(const std::string& json);

 private:
  FamilyTag tag_;
  std::vector<double> params_;
  // cached Student-t helpers
  double t_lognorm_ = 0.0;
  double t_lognorm1_ = 0.0;
};

/// Spec-facing wrappers: `direction` names the copula argument that carries
/// the conditioning variable; the conditioned value sits in the first slot.
double hfunc(const BivariateCopula& cop, double u, double v, int direction);
double hinv(const BivariateCopula& cop, double w, double v, int direction);

/// Clamp a value into the open evaluation interval [1e-10, 1 - 1e-10].
double clamp_unit(double u);

/// Parameter for the given family whose Kendall's tau matches `tau`
/// (magnitude for rotation-carrying families). Frank is solved numerically.
std::vector<double> tau_inversion(FamilyTag tag, double tau);

struct PairFitReport {
  bool converged = true;
  bool used_tau_fallback = false;
  double loglik = 0.0;
  double n_eff = 0.0;
};

/// Weighted maximum likelihood for one pair-copula. Starts at the
/// tau-inversion point; never returns a fit worse than the start.
BivariateCopula fit_pair(std::span<const double> u, std::span<const double> v,
                         std::span<const double> weights, FamilyTag family,
                         PairFitReport* report = nullptr);

/// AIC-minimizing family among the candidates; ties prefer fewer parameters,
/// then the fixed family/rotation order.
BivariateCopula select_family(std::span<const double> u,
                              std::span<const double> v,
                              std::span<const double> weights,
                              std::span<const FamilyTag> candidates,
                              PairFitReport* report = nullptr);

/// Expand family names to candidate tags, adding all four rotations for the
/// asymmetric families.
std::vector<FamilyTag> expand_family_menu(const std::vector<Family>& families);

/// Draw n pairs from the copula via conditional inversion.
void simulate_pair(const BivariateCopula& cop, int n, stats::Rng& rng,
                   std::vector<double>& u, std::vector<double>& v);

/// Count of pair fits performed since process start (used to verify that
/// bootstrap replication performs no refits).
std::uint64_t fit_counter();

}  // namespace svine
