#include "svine/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace svine {

std::string margin_mode_name(MarginMode m) {
  return m == MarginMode::parametric ? "parametric" : "semiparametric";
}

MarginMode margin_mode_from_name(const std::string& name) {
  if (name == "parametric" || name == "par") return MarginMode::parametric;
  if (name == "semiparametric" || name == "semipar") {
    return MarginMode::semiparametric;
  }
  throw std::domain_error("unknown margin mode: " + name);
}

int SVineModel::copula_param_count() const {
  int k = 0;
  for (const auto& [key, cop] : copulas) k += cop.param_count();
  return k;
}

int SVineModel::margin_param_count() const {
  int k = 0;
  for (const auto& m : margins) k += m.param_count();
  return k;
}

namespace {

void check_sample(const PseudoSample& s) {
  for (double v : s.u.data) {
    if (!(v > 0.0 && v < 1.0)) {
      throw std::domain_error("pseudo-sample values must lie in (0,1)");
    }
  }
}

// Visit each translated edge instance of the window vine exactly once:
// windows 0..n_win-2 contribute their min-time-1 edges, the last window all.
template <typename F>
void for_each_instance(const WindowVine& wv, int n_win, F&& f) {
  for (int t = 0; t < n_win; ++t) {
    const bool last = (t == n_win - 1);
    for (int e = 0; e < wv.num_edges(); ++e) {
      if (last || wv.edges()[e].min_time == 1) f(t, e);
    }
  }
}

std::vector<WindowState> make_states(const WindowVine& wv,
                                     const PseudoSample& sample) {
  const int W = wv.window_len();
  const int d = wv.dim();
  const int n_win = sample.u.rows - W + 1;
  std::vector<WindowState> states;
  states.reserve(n_win);
  for (int t = 0; t < n_win; ++t) {
    WindowState st(wv);
    for (int w = 1; w <= W; ++w) {
      for (int j = 1; j <= d; ++j) {
        st.set_var(wv.var_index(w, j), sample.u.at(t + w - 1, j - 1));
      }
    }
    states.push_back(std::move(st));
  }
  return states;
}

}  // namespace

SVineModel fit_sequential(const PseudoSample& sample, const SVineSpec& spec,
                          const FitControl& control) {
  spec.validate();
  check_sample(sample);
  const int T = sample.u.rows;
  const int d = spec.dim();
  const int p = spec.markov_order;
  if (sample.u.cols != d) {
    throw std::invalid_argument("fit_sequential: sample has wrong width");
  }
  if (T <= (p + 1) * d + 10) {
    throw std::domain_error("fit_sequential: series too short for p and d");
  }
  if (control.menu.empty()) {
    throw std::invalid_argument("fit_sequential: empty family menu");
  }

  const std::uint64_t fits_before = fit_counter();
  WindowVine wv(spec, p + 1);
  const int n_win = T - p;
  std::vector<WindowState> states = make_states(wv, sample);

  SVineModel model;
  model.spec = spec;
  model.mode = sample.mode;
  model.T = T;

  // class -> edges per level
  const int n_cls = static_cast<int>(wv.classes().size());
  std::vector<std::vector<int>> cls_edges(n_cls);
  for (int e = 0; e < wv.num_edges(); ++e) {
    cls_edges[wv.edges()[e].cls].push_back(e);
  }

  int fit_order = 0;
  for (int k = 1; k <= wv.levels(); ++k) {
    // classes present at this level, in canonical key order
    std::vector<int> level_classes;
    for (int c = 0; c < n_cls; ++c) {
      if (wv.classes()[c].level == k) level_classes.push_back(c);
    }
    std::sort(level_classes.begin(), level_classes.end(), [&](int a, int b) {
      return wv.classes()[a].key < wv.classes()[b].key;
    });
    for (int c : level_classes) {
      std::vector<double> xs, ys;
      for_each_instance(wv, n_win, [&](int t, int e) {
        if (wv.edges()[e].cls != c) return;
        xs.push_back(states[t].val_a(e));
        ys.push_back(states[t].val_b(e));
      });
      ClassFit cf;
      cf.key = wv.classes()[c].key;
      cf.level = k;
      cf.lag_span = wv.classes()[c].lag_span;
      cf.fit_order = fit_order++;
      cf.n_obs = static_cast<double>(xs.size());

      BivariateCopula cop;
      if (static_cast<int>(xs.size()) < std::max(10, control.min_class_obs)) {
        cf.insufficient = true;
      } else {
        try {
          PairFitReport rep;
          if (control.menu.size() > 1) {
            cop = select_family(xs, ys, {}, control.menu, &rep);
          } else {
            cop = fit_pair(xs, ys, {}, control.menu.front(), &rep);
          }
          cf.loglik = rep.loglik;
          cf.tau_fallback = rep.used_tau_fallback;
        } catch (const std::domain_error&) {
          cop = BivariateCopula();
          cf.insufficient = true;
        }
      }
      auto [it, inserted] = model.copulas.emplace(cf.key, std::move(cop));
      wv.bind_class(c, &it->second);
      model.diagnostics.class_fits.push_back(std::move(cf));
    }
  }

  // joint pseudo-log-likelihood over all translated instances
  double ll = 0.0;
  for_each_instance(wv, n_win, [&](int t, int e) {
    const BivariateCopula* cop = wv.edge_copula(e);
    if (cop->is_independence()) return;
    ll += cop->log_pdf(states[t].val_a(e), states[t].val_b(e));
  });
  model.loglik = ll;
  model.aic = -2.0 * ll + 2.0 * model.copula_param_count();
  for (auto& st : states) model.diagnostics.clamped += st.clamp_count();
  model.diagnostics.pair_fits = fit_counter() - fits_before;
  return model;
}

double model_loglik(const SVineModel& model, const PseudoSample& sample) {
  check_sample(sample);
  const int p = model.markov_order();
  const int T = sample.u.rows;
  if (sample.u.cols != model.dim()) {
    throw std::invalid_argument("loglik: sample has wrong width");
  }
  if (T <= p) throw std::domain_error("loglik: series shorter than the window");
  WindowVine wv(model.spec, p + 1);
  wv.bind(model.copulas);
  std::vector<WindowState> states = make_states(wv, sample);
  double ll = 0.0;
  for_each_instance(wv, T - p, [&](int t, int e) {
    const BivariateCopula* cop = wv.edge_copula(e);
    if (cop->is_independence()) return;
    ll += cop->log_pdf(states[t].val_a(e), states[t].val_b(e));
  });
  return ll;
}

double model_aic(const SVineModel& model, const PseudoSample& sample) {
  int k = model.copula_param_count();
  if (model.mode == MarginMode::parametric) k += model.margin_param_count();
  return -2.0 * model_loglik(model, sample) + 2.0 * k;
}

// --- structure selection -----------------------------------------------------------

namespace {

// Dissmann-style node in the selection forest: an edge of the previous tree
// carrying its two conditional data streams.
struct SelNode {
  std::vector<int> union_vars;           // sorted
  int var_a = 0, var_b = 0;              // conditioned pair (level >= 1)
  std::vector<double> stream_a;          // C(var_a | rest of union)
  std::vector<double> stream_b;          // C(var_b | rest of union)
};

std::vector<int> set_diff_int(const std::vector<int>& a,
                              const std::vector<int>& b) {
  std::vector<int> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(out));
  return out;
}

}  // namespace

SVineSpec select_structure(const PseudoSample& sample, int p,
                           const FitControl& control) {
  check_sample(sample);
  const int T = sample.u.rows;
  const int d = sample.u.cols;
  if (T < 10) throw std::domain_error("select_structure: series too short");
  SVineSpec spec;
  spec.markov_order = p;

  std::vector<VertexId> vertices;
  for (int j = 1; j <= d; ++j) vertices.push_back({1, j});

  if (d == 1) {
    spec.cross_section = VineStructure(vertices, {});
    spec.in_perm = {1};
    spec.out_perm = {1};
    spec.validate();
    return spec;
  }

  // --- cross-section: maximum spanning trees on |tau|, level by level ---
  std::vector<SelNode> nodes(d);
  for (int j = 0; j < d; ++j) {
    nodes[j].union_vars = {j + 1};
    nodes[j].var_a = j + 1;
    nodes[j].stream_a.resize(T);
    for (int t = 0; t < T; ++t) nodes[j].stream_a[t] = sample.u.at(t, j);
  }
  std::vector<std::vector<VineEdge>> cs_trees;

  for (int level = 1; level <= d - 1; ++level) {
    const int n_nodes = static_cast<int>(nodes.size());
    struct Cand {
      int i, j;
      double weight;
      std::vector<int> cond;  // conditioning vars
      int var_a, var_b;
      const std::vector<double>* da;
      const std::vector<double>* db;
    };
    std::vector<Cand> cands;
    for (int i = 0; i < n_nodes; ++i) {
      for (int j = i + 1; j < n_nodes; ++j) {
        // proximity: unions must overlap in exactly level-1 variables
        std::vector<int> inter;
        std::set_intersection(nodes[i].union_vars.begin(),
                              nodes[i].union_vars.end(),
                              nodes[j].union_vars.begin(),
                              nodes[j].union_vars.end(),
                              std::back_inserter(inter));
        if (static_cast<int>(inter.size()) != level - 1) continue;
        const auto sa = set_diff_int(nodes[i].union_vars, inter);
        const auto sb = set_diff_int(nodes[j].union_vars, inter);
        if (sa.size() != 1 || sb.size() != 1) continue;
        Cand c;
        c.i = i;
        c.j = j;
        c.cond = inter;
        c.var_a = sa[0];
        c.var_b = sb[0];
        c.da = sa[0] == nodes[i].var_a ? &nodes[i].stream_a : &nodes[i].stream_b;
        c.db = sb[0] == nodes[j].var_a ? &nodes[j].stream_a : &nodes[j].stream_b;
        c.weight = std::fabs(stats::kendall_tau(*c.da, *c.db));
        cands.push_back(std::move(c));
      }
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Cand& a, const Cand& b) {
                       return a.weight > b.weight;
                     });
    // Kruskal
    std::vector<int> parent(n_nodes);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    std::vector<SelNode> next_nodes;
    std::vector<VineEdge> tree;
    for (const Cand& c : cands) {
      if (static_cast<int>(tree.size()) == n_nodes - 1) break;
      const int ri = find(c.i), rj = find(c.j);
      if (ri == rj) continue;
      parent[ri] = rj;
      VineEdge e;
      e.a = {1, std::min(c.var_a, c.var_b)};
      e.b = {1, std::max(c.var_a, c.var_b)};
      for (int v : c.cond) e.conditioning.push_back({1, v});
      tree.push_back(e);
      // fit the pair and propagate conditional streams
      const BivariateCopula cop =
          control.menu.size() > 1
              ? select_family(*c.da, *c.db, {}, control.menu)
              : fit_pair(*c.da, *c.db, {}, control.menu.front());
      SelNode nn;
      nn.union_vars = nodes[c.i].union_vars;
      for (int v : nodes[c.j].union_vars) nn.union_vars.push_back(v);
      std::sort(nn.union_vars.begin(), nn.union_vars.end());
      nn.union_vars.erase(
          std::unique(nn.union_vars.begin(), nn.union_vars.end()),
          nn.union_vars.end());
      nn.var_a = c.var_a;
      nn.var_b = c.var_b;
      nn.stream_a.resize(T);
      nn.stream_b.resize(T);
      for (int t = 0; t < T; ++t) {
        nn.stream_a[t] = cop.hfunc2((*c.da)[t], (*c.db)[t]);
        nn.stream_b[t] = cop.hfunc1((*c.da)[t], (*c.db)[t]);
      }
      next_nodes.push_back(std::move(nn));
    }
    if (static_cast<int>(tree.size()) != n_nodes - 1) {
      throw std::logic_error("select_structure: spanning tree failed");
    }
    cs_trees.push_back(std::move(tree));
    nodes = std::move(next_nodes);
  }
  spec.cross_section = VineStructure::from_labels(vertices, cs_trees);

  // --- in/out permutations: greedy lag-1 |tau|, compatibility-respecting ---
  Matrix tau_lag(d, d);
  {
    std::vector<double> x(T - 1), y(T - 1);
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        for (int t = 0; t + 1 < T; ++t) {
          x[t] = sample.u.at(t, a);
          y[t] = sample.u.at(t + 1, b);
        }
        tau_lag.at(a, b) = stats::kendall_tau(x, y);
      }
    }
  }
  int i1 = 1, j1 = 1;
  double best = -1.0;
  for (int a = 1; a <= d; ++a) {
    for (int b = 1; b <= d; ++b) {
      const double w = std::fabs(tau_lag.at(a - 1, b - 1));
      if (w > best + 1e-15) {
        best = w;
        i1 = a;
        j1 = b;
      }
    }
  }
  auto grow = [&](int first, int target) {
    // target: the variable on the other side of the level-k cross edge
    std::vector<int> perm = {first};
    std::vector<char> used(d + 1, 0);
    used[first] = 1;
    while (static_cast<int>(perm.size()) < d) {
      int pick = -1;
      double pick_w = -1.0;
      for (int c = 1; c <= d; ++c) {
        if (used[c]) continue;
        std::vector<int> trial = perm;
        trial.push_back(c);
        if (!is_prefix_extendable(spec.cross_section, trial)) continue;
        const double w = std::fabs(tau_lag.at(c - 1, target - 1));
        if (w > pick_w + 1e-15) {
          pick_w = w;
          pick = c;
        }
      }
      if (pick < 0) {
        throw std::logic_error("select_structure: no compatible extension");
      }
      used[pick] = 1;
      perm.push_back(pick);
    }
    return perm;
  };
  spec.in_perm = grow(i1, j1);
  // out-perm scores tau between (t, i1) and (t+1, candidate)
  {
    std::vector<int> perm = {j1};
    std::vector<char> used(d + 1, 0);
    used[j1] = 1;
    while (static_cast<int>(perm.size()) < d) {
      int pick = -1;
      double pick_w = -1.0;
      for (int c = 1; c <= d; ++c) {
        if (used[c]) continue;
        std::vector<int> trial = perm;
        trial.push_back(c);
        if (!is_prefix_extendable(spec.cross_section, trial)) continue;
        const double w = std::fabs(tau_lag.at(i1 - 1, c - 1));
        if (w > pick_w + 1e-15) {
          pick_w = w;
          pick = c;
        }
      }
      if (pick < 0) {
        throw std::logic_error("select_structure: no compatible extension");
      }
      used[pick] = 1;
      perm.push_back(pick);
    }
    spec.out_perm = perm;
  }
  spec.validate();
  return spec;
}

// --- end-to-end -----------------------------------------------------------------------

PseudoSample to_pseudo_sample(const Matrix& data, const SVineModel& model) {
  if (data.cols != model.dim() || model.margins.empty()) {
    throw std::invalid_argument("to_pseudo_sample: incompatible model");
  }
  PseudoSample s;
  s.mode = model.mode;
  s.u = Matrix(data.rows, data.cols);
  for (int j = 0; j < data.cols; ++j) {
    for (int t = 0; t < data.rows; ++t) {
      s.u.at(t, j) = clamp_unit(model.margins[j].cdf(data.at(t, j)));
    }
  }
  return s;
}

SVineModel fit_model(const Matrix& data, const ModelBuildOptions& options) {
  const int T = data.rows, d = data.cols;
  if (d < 1 || T < 30) throw std::domain_error("fit_model: need T >= 30, d >= 1");

  std::vector<Margin> margins;
  margins.reserve(d);
  PseudoSample sample;
  sample.mode = options.mode;
  sample.u = Matrix(T, d);
  for (int j = 0; j < d; ++j) {
    std::vector<double> col(T);
    for (int t = 0; t < T; ++t) col[t] = data.at(t, j);
    Margin m;
    if (options.mode == MarginMode::parametric) {
      m.model = fit_margin_mle(col);
    } else {
      m.model = EmpiricalMargin(col);
    }
    const auto u = pit(col, m);
    for (int t = 0; t < T; ++t) sample.u.at(t, j) = u[t];
    margins.push_back(std::move(m));
  }

  FitControl control;
  control.menu = options.menu;
  SVineSpec spec = options.structure
                       ? *options.structure
                       : select_structure(sample, options.markov_order, control);
  spec.markov_order = options.markov_order;

  SVineModel model = fit_sequential(sample, spec, control);
  model.margins = std::move(margins);
  model.aic = -2.0 * model.loglik +
              2.0 * (model.copula_param_count() +
                     (model.mode == MarginMode::parametric
                          ? model.margin_param_count()
                          : 0));
  return model;
}

// --- serialization ----------------------------------------------------------------------

std::string SVineModel::to_json_string() const {
  nlohmann::json j;
  j["format"] = "svine-model-v1";
  j["spec"] = nlohmann::json::parse(spec.to_json_string());
  nlohmann::json cops = nlohmann::json::object();
  for (const auto& [key, cop] : copulas) {
    cops[key] = nlohmann::json::parse(cop.to_json_string());
  }
  j["copulas"] = cops;
  auto ms = nlohmann::json::array();
  for (const auto& m : margins) {
    ms.push_back(nlohmann::json::parse(m.to_json_string()));
  }
  j["margins"] = ms;
  j["fit"] = {{"T", T},
              {"mode", margin_mode_name(mode)},
              {"loglik", loglik},
              {"aic", aic},
              {"clamped", diagnostics.clamped},
              {"pair_fits", diagnostics.pair_fits}};
  auto cls = nlohmann::json::array();
  for (const auto& cf : diagnostics.class_fits) {
    cls.push_back({{"key", cf.key},
                   {"level", cf.level},
                   {"lag_span", cf.lag_span},
                   {"n_obs", cf.n_obs},
                   {"loglik", cf.loglik},
                   {"insufficient", cf.insufficient},
                   {"tau_fallback", cf.tau_fallback}});
  }
  j["fit"]["classes"] = cls;
  return j.dump(2);
}

SVineModel SVineModel::from_json_string(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (j.value("format", "") != "svine-model-v1") {
    throw std::domain_error("model JSON: unknown format tag");
  }
  SVineModel m;
  m.spec = SVineSpec::from_json_string(j.at("spec").dump());
  for (const auto& [key, cj] : j.at("copulas").items()) {
    m.copulas.emplace(key, BivariateCopula::from_json_string(cj.dump()));
  }
  for (const auto& mj : j.at("margins")) {
    m.margins.push_back(Margin::from_json_string(mj.dump()));
  }
  const auto& fit = j.at("fit");
  m.T = fit.at("T").get<int>();
  m.mode = margin_mode_from_name(fit.at("mode").get<std::string>());
  m.loglik = fit.at("loglik").get<double>();
  m.aic = fit.at("aic").get<double>();
  return m;
}

}  // namespace svine
