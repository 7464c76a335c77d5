#include "svine/evaluator.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace svine {

namespace {

std::string vset_key(std::vector<VertexId> s) {
  std::sort(s.begin(), s.end());
  std::ostringstream os;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << ';';
    os << s[i].time << '.' << s[i].var;
  }
  return os.str();
}

}  // namespace

WindowVine::WindowVine(const SVineSpec& spec, int window_len)
    : W_(window_len), d_(spec.dim()), vine_(build_svine(spec, window_len)) {
  classes_ = edge_classes(vine_);
  bound_.assign(classes_.classes.size(), nullptr);

  // flatten edges in level order
  std::vector<std::vector<int>> global_id(vine_.num_trees());
  level_begin_.push_back(0);
  for (int k = 1; k <= vine_.num_trees(); ++k) {
    const auto& tree = vine_.tree(k);
    global_id[k - 1].resize(tree.size());
    for (std::size_t i = 0; i < tree.size(); ++i) {
      const VineEdge& e = tree[i];
      Edge fe;
      fe.level = k;
      fe.a_var = var_index(e.a.time, e.a.var);
      fe.b_var = var_index(e.b.time, e.b.var);
      fe.cls = classes_.edge_class[k - 1][i];
      fe.min_time = e.complete_union.front().time;
      if (k == 1) {
        fe.v1 = fe.a_var;
        fe.v2 = fe.b_var;
      } else {
        fe.v1 = global_id[k - 2][e.v1];
        fe.v2 = global_id[k - 2][e.v2];
        fe.a_child = fe.v1;
        fe.b_child = fe.v2;
        const VineEdge& c1 = vine_.tree(k - 1)[e.v1];
        const VineEdge& c2 = vine_.tree(k - 1)[e.v2];
        fe.a_from_child_a = (e.a == c1.a);
        fe.b_from_child_a = (e.b == c2.a);
      }
      global_id[k - 1][i] = static_cast<int>(edges_.size());
      edges_.push_back(fe);
    }
    level_begin_.push_back(static_cast<int>(edges_.size()));
  }

  // shifted-edge lookup for rolling
  std::map<std::string, int> by_label;
  {
    int gid = 0;
    for (int k = 1; k <= vine_.num_trees(); ++k) {
      for (const VineEdge& e : vine_.tree(k)) {
        by_label[e.label()] = gid++;
      }
    }
  }
  {
    int gid = 0;
    for (int k = 1; k <= vine_.num_trees(); ++k) {
      for (VineEdge e : vine_.tree(k)) {
        e.a.time += 1;
        e.b.time += 1;
        for (auto& v : e.conditioning) v.time += 1;
        const auto it = by_label.find(e.label());
        edges_[gid].shifted_id = it == by_label.end() ? -1 : it->second;
        ++gid;
      }
    }
  }

  // sampling order: (1, i_1..i_d), then (t, j_1..j_d) for t = 2..W
  for (int j : spec.in_perm) order_.push_back(var_index(1, j));
  for (int t = 2; t <= W_; ++t) {
    for (int j : spec.out_perm) order_.push_back(var_index(t, j));
  }

  // chains: for position n, the edge at level n whose complete union equals
  // {order_[0..n]} and whose conditioned pair contains order_[n], followed by
  // its same-side children down to level 1
  std::vector<VertexId> prefix;
  auto vid_of = [&](int flat) {
    return VertexId{flat / d_ + 1, flat % d_ + 1};
  };
  chains_.resize(order_.size());
  prefix.push_back(vid_of(order_[0]));
  for (std::size_t n = 1; n < order_.size(); ++n) {
    const VertexId x = vid_of(order_[n]);
    prefix.push_back(x);
    const std::string want = vset_key(prefix);
    const int k = static_cast<int>(n);
    int top = -1;
    for (int gid = level_begin_[k - 1]; gid < level_begin_[k]; ++gid) {
      const VineEdge& e = vine_.tree(k)[gid - level_begin_[k - 1]];
      if (vset_key(e.complete_union) != want) continue;
      if (e.a == x || e.b == x) {
        top = gid;
        break;
      }
    }
    if (top < 0) {
      throw std::logic_error(
          "window vine: no sampling chain for variable " + to_string(x));
    }
    std::vector<int> chain;
    int cur = top;
    while (cur >= 0) {
      chain.push_back(cur);
      const Edge& fe = edges_[cur];
      const bool on_a = (fe.a_var == order_[n]);
      if (fe.level == 1) break;
      cur = on_a ? fe.a_child : fe.b_child;
      if (!(edges_[cur].a_var == order_[n] || edges_[cur].b_var == order_[n])) {
        throw std::logic_error("window vine: broken sampling chain");
      }
    }
    std::reverse(chain.begin(), chain.end());
    chains_[n] = std::move(chain);
  }
}

void WindowVine::bind(const std::map<std::string, BivariateCopula>& copulas) {
  for (std::size_t c = 0; c < classes_.classes.size(); ++c) {
    const auto it = copulas.find(classes_.classes[c].key);
    if (it == copulas.end()) {
      throw std::invalid_argument("window vine: no copula for class " +
                                  classes_.classes[c].key);
    }
    bound_[c] = &it->second;
  }
}

void WindowVine::bind_class(int cls, const BivariateCopula* cop) {
  bound_[cls] = cop;
}

// --- WindowState ------------------------------------------------------------------

WindowState::WindowState(const WindowVine& wv)
    : wv_(&wv),
      u_(wv.num_vars(), 0.0),
      has_u_(wv.num_vars(), 0),
      va_(wv.num_edges(), 0.0),
      vb_(wv.num_edges(), 0.0),
      ha_(wv.num_edges(), 0),
      hb_(wv.num_edges(), 0) {}

void WindowState::reset() {
  std::fill(has_u_.begin(), has_u_.end(), 0);
  std::fill(ha_.begin(), ha_.end(), 0);
  std::fill(hb_.begin(), hb_.end(), 0);
}

void WindowState::set_var(int flat_id, double u) {
  u_[flat_id] = clamp_unit(u);
  has_u_[flat_id] = 1;
}

double WindowState::val_a(int edge_id) {
  if (ha_[edge_id]) return va_[edge_id];
  const auto& e = wv_->edges()[edge_id];
  double v;
  if (e.level == 1) {
    if (!has_u_[e.a_var]) {
      throw std::logic_error("window state: variable not set");
    }
    v = u_[e.a_var];
  } else {
    const double ca = val_a(e.a_child);
    const double cb = val_b(e.a_child);
    const BivariateCopula* cop = wv_->edge_copula(e.a_child);
    v = e.a_from_child_a ? cop->hfunc2(ca, cb) : cop->hfunc1(ca, cb);
    const double raw = v;
    v = clamp_unit(v);
    if (v != raw) ++clamp_count_;
  }
  va_[edge_id] = v;
  ha_[edge_id] = 1;
  return v;
}

double WindowState::val_b(int edge_id) {
  if (hb_[edge_id]) return vb_[edge_id];
  const auto& e = wv_->edges()[edge_id];
  double v;
  if (e.level == 1) {
    if (!has_u_[e.b_var]) {
      throw std::logic_error("window state: variable not set");
    }
    v = u_[e.b_var];
  } else {
    const double ca = val_a(e.b_child);
    const double cb = val_b(e.b_child);
    const BivariateCopula* cop = wv_->edge_copula(e.b_child);
    v = e.b_from_child_a ? cop->hfunc2(ca, cb) : cop->hfunc1(ca, cb);
    const double raw = v;
    v = clamp_unit(v);
    if (v != raw) ++clamp_count_;
  }
  vb_[edge_id] = v;
  hb_[edge_id] = 1;
  return v;
}

double WindowState::sample_var(int pos, double w) {
  const int x = wv_->sampling_order()[pos];
  double v = clamp_unit(w);
  const auto& chain = wv_->chain(pos);
  // invert from the top of the chain down to the first tree
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const int eid = *it;
    const auto& e = wv_->edges()[eid];
    const BivariateCopula* cop = wv_->edge_copula(eid);
    if (e.a_var == x) {
      const double partner = val_b(eid);
      v = cop->hinv2(v, partner);
      va_[eid] = v;
      ha_[eid] = 1;
    } else {
      const double partner = val_a(eid);
      v = cop->hinv1(partner, v);
      vb_[eid] = v;
      hb_[eid] = 1;
    }
  }
  set_var(x, v);
  return u_[x];
}

void WindowState::shift() {
  const int W = wv_->window_len();
  const int d = wv_->dim();
  std::vector<double> nu(u_.size(), 0.0);
  std::vector<char> nhas(u_.size(), 0);
  for (int w = 1; w + 1 <= W; ++w) {
    for (int j = 1; j <= d; ++j) {
      const int dst = wv_->var_index(w, j);
      const int src = wv_->var_index(w + 1, j);
      if (has_u_[src]) {
        nu[dst] = u_[src];
        nhas[dst] = 1;
      }
    }
  }
  std::vector<double> nva(va_.size(), 0.0), nvb(vb_.size(), 0.0);
  std::vector<char> nha(va_.size(), 0), nhb(vb_.size(), 0);
  for (int e = 0; e < wv_->num_edges(); ++e) {
    const int src = wv_->edges()[e].shifted_id;
    if (src >= 0 && ha_[src]) {
      nva[e] = va_[src];
      nha[e] = 1;
    }
    if (src >= 0 && hb_[src]) {
      nvb[e] = vb_[src];
      nhb[e] = 1;
    }
  }
  u_.swap(nu);
  has_u_.swap(nhas);
  va_.swap(nva);
  vb_.swap(nvb);
  ha_.swap(nha);
  hb_.swap(nhb);
}

double WindowState::loglik() {
  double ll = 0.0;
  for (int e = 0; e < wv_->num_edges(); ++e) {
    const BivariateCopula* cop = wv_->edge_copula(e);
    if (cop->is_independence()) continue;
    ll += cop->log_pdf(val_a(e), val_b(e));
  }
  return ll;
}

}  // namespace svine
