#include "svine/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

namespace svine {

int default_block(int T) {
  return std::max(1, static_cast<int>(std::floor(std::cbrt(double(T)))));
}

MultiplierStream gen_multipliers(int T, int block, std::uint64_t seed,
                                 std::uint64_t stream) {
  if (block < 1 || block >= T) {
    throw std::domain_error("gen_multipliers: need 1 <= block < T");
  }
  std::vector<double> w(block);
  double norm = 0.0;
  for (int j = 0; j < block; ++j) {
    w[j] = 1.0 - static_cast<double>(j) / block;
    norm += w[j] * w[j];
  }
  norm = std::sqrt(norm);
  for (double& x : w) x /= norm;

  stats::Rng rng(seed, stream);
  std::vector<double> z(T + block - 1);
  for (double& x : z) x = rng.normal();

  MultiplierStream ms;
  ms.block = block;
  ms.xi.resize(T);
  for (int t = 0; t < T; ++t) {
    double s = 0.0;
    for (int j = 0; j < block; ++j) s += w[j] * z[t + block - 1 - j];
    ms.xi[t] = 1.0 + s;
  }
  return ms;
}

// --- parameter layout ---------------------------------------------------------------

std::vector<std::string> ParamLayout::names() const {
  static const char* margin_names[] = {"mu", "sigma", "nu", "gamma"};
  std::vector<std::string> out;
  for (const Entry& e : entries) {
    if (e.is_margin) {
      out.push_back("margin" + std::to_string(e.margin_j + 1) + "." +
                    margin_names[e.sub_index]);
    } else {
      out.push_back(e.cls_key + "#" + std::to_string(e.sub_index));
    }
  }
  return out;
}

ParamLayout param_layout(const SVineModel& model, bool include_margins) {
  ParamLayout layout;
  if (include_margins) {
    for (std::size_t j = 0; j < model.margins.size(); ++j) {
      if (!model.margins[j].parametric()) {
        throw std::invalid_argument(
            "param_layout: parametric layout needs parametric margins");
      }
      const auto& p = std::get<SkewTParams>(model.margins[j].model);
      const double vals[] = {p.mu, p.sigma, p.nu, p.gamma};
      for (int s = 0; s < 4; ++s) {
        layout.entries.push_back({true, static_cast<int>(j), s, ""});
        layout.point.push_back(vals[s]);
      }
    }
  }
  for (const auto& [key, cop] : model.copulas) {
    for (int s = 0; s < cop.param_count(); ++s) {
      layout.entries.push_back({false, -1, s, key});
      layout.point.push_back(cop.params()[s]);
    }
  }
  return layout;
}

namespace {

double fd_step(double value) { return std::max(1e-4, 1e-4 * std::fabs(value)); }

std::vector<double> clamp_params(const FamilyTag& tag,
                                 std::vector<double> params) {
  switch (tag.family) {
    case Family::independence:
      break;
    case Family::gaussian:
      params[0] = std::clamp(params[0], -0.99949, 0.99949);
      break;
    case Family::student_t:
      params[0] = std::clamp(params[0], -0.99949, 0.99949);
      params[1] = std::clamp(params[1], 2.05, 300.0);
      break;
    case Family::clayton:
      params[0] = std::clamp(params[0], 1e-4, 50.0);
      break;
    case Family::gumbel:
      params[0] = std::clamp(params[0], 1.0, 50.0);
      break;
    case Family::frank: {
      const double sign = params[0] >= 0.0 ? 1.0 : -1.0;
      params[0] = sign * std::clamp(std::fabs(params[0]), 1e-4, 100.0);
      break;
    }
  }
  return params;
}

SkewTParams clamp_margin(SkewTParams p) {
  p.sigma = std::max(p.sigma, 1e-8);
  p.nu = std::clamp(p.nu, 2.05, 1e7);
  p.gamma = std::clamp(p.gamma, 1e-4, 1e4);
  return p;
}

// Shared machinery for the finite-difference score passes.
struct PhiContext {
  const SVineModel* model;
  WindowVine wv;
  std::map<std::string, BivariateCopula> scratch;
  ParamLayout layout;
  int T, d, p;
  int q_margin = 0;  // leading margin entries in the layout

  PhiContext(const SVineModel& m, bool include_margins, int T_)
      : model(&m),
        wv(m.spec, m.markov_order() + 1),
        scratch(m.copulas),
        layout(param_layout(m, include_margins)),
        T(T_),
        d(m.dim()),
        p(m.markov_order()) {
    wv.bind(scratch);
    for (const auto& e : layout.entries) q_margin += e.is_margin ? 1 : 0;
  }

  // install copula parameters (layout order) into the bound scratch map
  void set_theta(std::span<const double> values) {
    std::map<std::string, std::vector<double>> per_class;
    for (int m = q_margin; m < layout.size(); ++m) {
      per_class[layout.entries[m].cls_key].push_back(values[m]);
    }
    for (auto& [key, params] : per_class) {
      const FamilyTag tag = scratch.at(key).tag();
      scratch.at(key) = BivariateCopula(tag, clamp_params(tag, std::move(params)));
    }
  }

  // copula score rows for a fixed pseudo-sample into phi (margin rows not touched)
  void add_theta_rows(const PseudoSample& sample, Matrix& phi) {
    const int n_win = T - p;
    std::vector<WindowState> states;
    states.reserve(n_win);
    const int W = p + 1;
    for (int t = 0; t < n_win; ++t) {
      WindowState st(wv);
      for (int w = 1; w <= W; ++w) {
        for (int j = 1; j <= d; ++j) {
          st.set_var(wv.var_index(w, j), sample.u.at(t + w - 1, j - 1));
        }
      }
      states.push_back(std::move(st));
    }
    // per-class +/- copulas for the own-parameter central differences
    struct ClsGrad {
      int col = -1;  // first layout column of this class
      std::vector<BivariateCopula> plus, minus;
      std::vector<double> h;
    };
    std::vector<ClsGrad> grads(wv.classes().size());
    std::map<std::string, int> first_col;
    for (int m = q_margin; m < layout.size(); ++m) {
      if (!first_col.count(layout.entries[m].cls_key)) {
        first_col[layout.entries[m].cls_key] = m;
      }
    }
    for (std::size_t c = 0; c < wv.classes().size(); ++c) {
      const std::string& key = wv.classes()[c].key;
      const BivariateCopula& cop = scratch.at(key);
      if (cop.param_count() == 0) continue;
      ClsGrad g;
      g.col = first_col.at(key);
      for (int s = 0; s < cop.param_count(); ++s) {
        const double h = fd_step(cop.params()[s]);
        auto pp = cop.params();
        pp[s] += h;
        g.plus.emplace_back(cop.tag(), clamp_params(cop.tag(), pp));
        pp = cop.params();
        pp[s] -= h;
        g.minus.emplace_back(cop.tag(), clamp_params(cop.tag(), pp));
        g.h.push_back(h);
      }
      grads[c] = std::move(g);
    }
    for (int t = 0; t < n_win; ++t) {
      const bool last = (t == n_win - 1);
      for (int e = 0; e < wv.num_edges(); ++e) {
        const auto& fe = wv.edges()[e];
        if (!last && fe.min_time != 1) continue;
        const ClsGrad& g = grads[fe.cls];
        if (g.col < 0) continue;
        const double x = states[t].val_a(e);
        const double y = states[t].val_b(e);
        const int row = t + fe.min_time - 1;
        for (std::size_t s = 0; s < g.h.size(); ++s) {
          phi.at(row, g.col + static_cast<int>(s)) +=
              (g.plus[s].log_pdf(x, y) - g.minus[s].log_pdf(x, y)) /
              (2.0 * g.h[s]);
        }
      }
    }
  }
};

Matrix theta_phi(PhiContext& ctx, std::span<const double> values,
                 const PseudoSample& sample) {
  ctx.set_theta(values);
  Matrix phi(ctx.T, ctx.layout.size());
  ctx.add_theta_rows(sample, phi);
  return phi;
}

// Full parametric pass: margins decoded from the leading layout entries, the
// pseudo-sample re-derived, margin score rows added.
Matrix parametric_phi(PhiContext& ctx, std::span<const double> values,
                      const Matrix& data) {
  std::vector<SkewTParams> margins(ctx.d);
  for (int m = 0; m < ctx.q_margin; ++m) {
    const auto& e = ctx.layout.entries[m];
    double* slot = nullptr;
    switch (e.sub_index) {
      case 0: slot = &margins[e.margin_j].mu; break;
      case 1: slot = &margins[e.margin_j].sigma; break;
      case 2: slot = &margins[e.margin_j].nu; break;
      default: slot = &margins[e.margin_j].gamma; break;
    }
    *slot = values[m];
  }
  for (auto& m : margins) m = clamp_margin(m);

  PseudoSample sample;
  sample.mode = MarginMode::parametric;
  sample.u = Matrix(ctx.T, ctx.d);
  for (int j = 0; j < ctx.d; ++j) {
    for (int t = 0; t < ctx.T; ++t) {
      sample.u.at(t, j) = clamp_unit(margins[j].cdf(data.at(t, j)));
    }
  }
  ctx.set_theta(values);
  Matrix phi(ctx.T, ctx.layout.size());
  ctx.add_theta_rows(sample, phi);
  // marginal log-density scores
  for (int m = 0; m < ctx.q_margin; ++m) {
    const auto& e = ctx.layout.entries[m];
    const double h = fd_step(values[m]);
    SkewTParams plus = margins[e.margin_j], minus = margins[e.margin_j];
    switch (e.sub_index) {
      case 0: plus.mu += h; minus.mu -= h; break;
      case 1: plus.sigma += h; minus.sigma -= h; break;
      case 2: plus.nu += h; minus.nu -= h; break;
      default: plus.gamma += h; minus.gamma -= h; break;
    }
    plus = clamp_margin(plus);
    minus = clamp_margin(minus);
    for (int t = 0; t < ctx.T; ++t) {
      const double x = data.at(t, e.margin_j);
      phi.at(t, m) += (plus.log_pdf(x) - minus.log_pdf(x)) / (2.0 * h);
    }
  }
  return phi;
}

std::vector<double> column_sums(const Matrix& m) {
  std::vector<double> s(m.cols, 0.0);
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) s[c] += m.at(r, c);
  }
  return s;
}

// Jacobian by nested central differences of the summed score vector.
template <typename PhiFn>
Matrix jacobian_fd(const ParamLayout& layout, const PhiFn& phi_fn, int T) {
  const int q = layout.size();
  Matrix jac(q, q);
  for (int m = 0; m < q; ++m) {
    std::vector<double> plus = layout.point, minus = layout.point;
    const double h = fd_step(layout.point[m]);
    plus[m] += h;
    minus[m] -= h;
    const auto sp = column_sums(phi_fn(plus));
    const auto sm = column_sums(phi_fn(minus));
    for (int r = 0; r < q; ++r) {
      jac.at(r, m) = (sp[r] - sm[r]) / (2.0 * h * static_cast<double>(T));
    }
  }
  return jac;
}

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd out(m.rows, m.cols);
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) out(r, c) = m.at(r, c);
  }
  return out;
}

bool ridge_if_singular(Eigen::MatrixXd& j) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(j);
  if (lu.isInvertible()) return false;
  const double lambda = 1e-6 * j.trace() / static_cast<double>(j.rows());
  j += std::fabs(lambda) *
       Eigen::MatrixXd::Identity(j.rows(), j.cols());
  return true;
}

// Weighted empirical margins evaluated at the sample's own ranks, normalized
// by the multiplier mean so that the top rank maps to T/(T+1) exactly; with
// unit multipliers this reproduces rank/(T+1).
Matrix bootstrap_pseudo(const PseudoSample& sample,
                        const std::vector<double>& xi) {
  const int T = sample.u.rows, d = sample.u.cols;
  const double total = std::accumulate(xi.begin(), xi.end(), 0.0);
  const double scale = static_cast<double>(T) /
                       (total * (static_cast<double>(T) + 1.0));
  Matrix out(T, d);
  std::vector<int> order(T);
  for (int j = 0; j < d; ++j) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return sample.u.at(a, j) < sample.u.at(b, j);
    });
    double acc = 0.0;
    int i = 0;
    while (i < T) {
      int k = i;
      double g = 0.0;
      while (k < T &&
             sample.u.at(order[k], j) == sample.u.at(order[i], j)) {
        g += xi[order[k]];
        ++k;
      }
      acc += g;  // ties share the count of <= their common value
      for (int s = i; s < k; ++s) {
        out.at(order[s], j) = clamp_unit(acc * scale);
      }
      i = k;
    }
  }
  return out;
}

}  // namespace

ScoreJacobian score_and_jacobian(const SVineModel& model,
                                 const PseudoSample& sample) {
  PhiContext ctx(model, false, sample.u.rows);
  ScoreJacobian sj;
  sj.layout = ctx.layout;
  sj.phi = theta_phi(ctx, ctx.layout.point, sample);
  sj.score_sum = column_sums(sj.phi);
  sj.jacobian = jacobian_fd(
      ctx.layout,
      [&](const std::vector<double>& v) { return theta_phi(ctx, v, sample); },
      ctx.T);
  Eigen::MatrixXd j = to_eigen(sj.jacobian);
  sj.ridged = ridge_if_singular(j);
  for (int r = 0; r < sj.jacobian.rows; ++r) {
    for (int c = 0; c < sj.jacobian.cols; ++c) sj.jacobian.at(r, c) = j(r, c);
  }
  ctx.set_theta(ctx.layout.point);
  return sj;
}

ScoreJacobian score_and_jacobian_parametric(const SVineModel& model,
                                            const Matrix& data) {
  if (model.margins.empty()) {
    throw std::invalid_argument(
        "score_and_jacobian_parametric: model has no margins");
  }
  PhiContext ctx(model, true, data.rows);
  ScoreJacobian sj;
  sj.layout = ctx.layout;
  sj.phi = parametric_phi(ctx, ctx.layout.point, data);
  sj.score_sum = column_sums(sj.phi);
  sj.jacobian = jacobian_fd(
      ctx.layout,
      [&](const std::vector<double>& v) { return parametric_phi(ctx, v, data); },
      ctx.T);
  Eigen::MatrixXd j = to_eigen(sj.jacobian);
  sj.ridged = ridge_if_singular(j);
  for (int r = 0; r < sj.jacobian.rows; ++r) {
    for (int c = 0; c < sj.jacobian.cols; ++c) sj.jacobian.at(r, c) = j(r, c);
  }
  ctx.set_theta(ctx.layout.point);
  return sj;
}

namespace {

BootstrapResult replicate_loop(
    const ScoreJacobian& sj, int T, int R, int block, std::uint64_t seed,
    const std::function<Matrix(const std::vector<double>&)>* phi_for_xi) {
  if (R < 0) throw std::domain_error("bootstrap: R must be >= 0");
  const int q = sj.layout.size();
  BootstrapResult out;
  out.layout = sj.layout;
  out.ridged = sj.ridged;
  out.replicates = Matrix(R, q);
  const std::uint64_t fits_before = fit_counter();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(to_eigen(sj.jacobian));
  for (int r = 0; r < R; ++r) {
    const MultiplierStream ms = gen_multipliers(T, block, seed, r);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(q);
    const Matrix* phi = &sj.phi;
    Matrix phi_boot;
    if (phi_for_xi) {
      phi_boot = (*phi_for_xi)(ms.xi);
      phi = &phi_boot;
    }
    for (int t = 0; t < T; ++t) {
      for (int c = 0; c < q; ++c) g(c) += ms.xi[t] * phi->at(t, c);
    }
    g /= static_cast<double>(T);
    const Eigen::VectorXd step = lu.solve(g);
    for (int c = 0; c < q; ++c) {
      out.replicates.at(r, c) = sj.layout.point[c] - step(c);
    }
  }
  out.refits = fit_counter() - fits_before;
  return out;
}

}  // namespace

BootstrapResult bootstrap_params(const SVineModel& model,
                                 const PseudoSample& sample, int R, int block,
                                 std::uint64_t seed) {
  ScoreJacobian sj = score_and_jacobian(model, sample);
  if (model.mode == MarginMode::semiparametric) {
    PhiContext ctx(model, false, sample.u.rows);
    std::function<Matrix(const std::vector<double>&)> phi_for_xi =
        [&](const std::vector<double>& xi) {
          PseudoSample boot;
          boot.mode = sample.mode;
          boot.u = bootstrap_pseudo(sample, xi);
          return theta_phi(ctx, ctx.layout.point, boot);
        };
    return replicate_loop(sj, sample.u.rows, R, block, seed, &phi_for_xi);
  }
  return replicate_loop(sj, sample.u.rows, R, block, seed, nullptr);
}

BootstrapResult bootstrap_params_parametric(const SVineModel& model,
                                            const Matrix& data, int R,
                                            int block, std::uint64_t seed) {
  ScoreJacobian sj = score_and_jacobian_parametric(model, data);
  return replicate_loop(sj, data.rows, R, block, seed, nullptr);
}

SVineModel apply_replicate(const SVineModel& model, const ParamLayout& layout,
                           std::span<const double> values) {
  SVineModel out = model;
  std::map<std::string, std::vector<double>> per_class;
  for (int m = 0; m < layout.size(); ++m) {
    const auto& e = layout.entries[m];
    if (e.is_margin) {
      auto& p = std::get<SkewTParams>(out.margins[e.margin_j].model);
      switch (e.sub_index) {
        case 0: p.mu = values[m]; break;
        case 1: p.sigma = values[m]; break;
        case 2: p.nu = values[m]; break;
        default: p.gamma = values[m]; break;
      }
    } else {
      per_class[e.cls_key].push_back(values[m]);
    }
  }
  for (auto& m : out.margins) {
    if (m.parametric()) {
      m.model = clamp_margin(std::get<SkewTParams>(m.model));
    }
  }
  for (auto& [key, params] : per_class) {
    const FamilyTag tag = out.copulas.at(key).tag();
    out.copulas.at(key) =
        BivariateCopula(tag, clamp_params(tag, std::move(params)));
  }
  return out;
}

ForecastBands bootstrap_forecast(const SVineModel& model,
                                 const PseudoSample& sample,
                                 const ForecastRequest& request, int R,
                                 int block, std::uint64_t seed,
                                 double nominal) {
  if (R < 1) throw std::domain_error("bootstrap_forecast: R must be >= 1");
  const BootstrapResult reps = bootstrap_params(model, sample, R, block, seed);
  const int cells = request.horizon * model.dim();
  ForecastBands out;
  out.nominal = nominal;
  for (const Functional& f : request.functionals) {
    ForecastBand band;
    band.functional = f;
    band.replicate_values = Matrix(R, cells);
    out.bands.push_back(std::move(band));
  }
  std::vector<double> col(request.n_sims);
  for (int r = 0; r < R; ++r) {
    std::vector<double> vals(reps.layout.size());
    for (int c = 0; c < reps.layout.size(); ++c) {
      vals[c] = reps.replicates.at(r, c);
    }
    const SVineModel mr = apply_replicate(model, reps.layout, vals);
    const std::uint64_t sim_seed =
        stats::Rng(seed, 0x53494D0000ULL + static_cast<std::uint64_t>(r))
            .next_u64();
    const Matrix sims = simulate_conditional(mr, request.history,
                                             request.horizon, request.n_sims,
                                             sim_seed);
    for (std::size_t fi = 0; fi < request.functionals.size(); ++fi) {
      for (int c = 0; c < cells; ++c) {
        for (int i = 0; i < request.n_sims; ++i) col[i] = sims.at(i, c);
        out.bands[fi].replicate_values.at(r, c) =
            predict_functional(col, request.functionals[fi]);
      }
    }
  }
  const double lo_q = (1.0 - nominal) / 2.0;
  const double hi_q = 1.0 - lo_q;
  for (auto& band : out.bands) {
    band.lo = Matrix(request.horizon, model.dim());
    band.hi = Matrix(request.horizon, model.dim());
    std::vector<double> v(R);
    for (int c = 0; c < cells; ++c) {
      for (int r = 0; r < R; ++r) v[r] = band.replicate_values.at(r, c);
      band.lo.at(c / model.dim(), c % model.dim()) =
          stats::sample_quantile(v, lo_q);
      band.hi.at(c / model.dim(), c % model.dim()) =
          stats::sample_quantile(v, hi_q);
    }
  }
  return out;
}

}  // namespace svine
