#include "svine/vine.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace svine {

namespace {

using VSet = std::vector<VertexId>;  // sorted

VSet set_union_of(const VSet& a, const VSet& b) {
  VSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

VSet set_intersection_of(const VSet& a, const VSet& b) {
  VSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

VSet set_difference_of(const VSet& a, const VSet& b) {
  VSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(out));
  return out;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  /// returns false if x and y were already connected
  bool unite(int x, int y) {
    const int rx = find(x), ry = find(y);
    if (rx == ry) return false;
    parent[rx] = ry;
    return true;
  }
};

int min_time(const VineEdge& e) {
  int m = std::min(e.a.time, e.b.time);
  for (const auto& v : e.conditioning) m = std::min(m, v.time);
  return m;
}

VineEdge shift_edge(const VineEdge& e, int tau) {
  VineEdge out = e;
  out.a.time += tau;
  out.b.time += tau;
  for (auto& v : out.conditioning) v.time += tau;
  for (auto& v : out.complete_union) v.time += tau;
  return out;
}

std::string vset_key(const VSet& s) {
  std::ostringstream os;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << ';';
    os << s[i].time << '.' << s[i].var;
  }
  return os.str();
}

}  // namespace

std::string to_string(const VertexId& v) {
  return std::to_string(v.time) + "." + std::to_string(v.var);
}

int VineEdge::lag_span() const {
  int lo = std::min(a.time, b.time), hi = std::max(a.time, b.time);
  for (const auto& v : conditioning) {
    lo = std::min(lo, v.time);
    hi = std::max(hi, v.time);
  }
  return hi - lo;
}

std::string VineEdge::label() const {
  std::ostringstream os;
  os << to_string(a) << ',' << to_string(b) << '|';
  for (std::size_t i = 0; i < conditioning.size(); ++i) {
    if (i) os << ';';
    os << to_string(conditioning[i]);
  }
  return os.str();
}

std::string edge_class_key(const VineEdge& e) {
  return shift_edge(e, 1 - min_time(e)).label();
}

// --- construction and labeling ------------------------------------------------

VineStructure::VineStructure(
    std::vector<VertexId> vertices,
    const std::vector<std::vector<std::pair<int, int>>>& links)
    : vertices_(std::move(vertices)) {
  validate_and_label(links);
}

void VineStructure::validate_and_label(
    const std::vector<std::vector<std::pair<int, int>>>& links) {
  const int n = num_vertices();
  if (n == 0) throw std::invalid_argument("vine: empty vertex set");
  {
    std::set<VertexId> uniq(vertices_.begin(), vertices_.end());
    if (static_cast<int>(uniq.size()) != n) {
      throw std::invalid_argument("vine: duplicate vertices");
    }
  }
  trees_.clear();
  trees_.resize(links.size());
  for (std::size_t kk = 0; kk < links.size(); ++kk) {
    const int k = static_cast<int>(kk) + 1;
    const int prev_count = k == 1 ? n : static_cast<int>(trees_[kk - 1].size());
    const int expected = prev_count - 1;
    if (static_cast<int>(links[kk].size()) != expected) {
      throw std::invalid_argument("vine: tree " + std::to_string(k) + " has " +
                                  std::to_string(links[kk].size()) +
                                  " edges, expected " +
                                  std::to_string(expected));
    }
    UnionFind uf(prev_count);
    auto& tree = trees_[kk];
    tree.reserve(links[kk].size());
    for (const auto& [p, q] : links[kk]) {
      if (p < 0 || q < 0 || p >= prev_count || q >= prev_count || p == q) {
        throw std::invalid_argument("vine: bad endpoint index in tree " +
                                    std::to_string(k));
      }
      VineEdge e;
      e.level = k;
      e.v1 = p;
      e.v2 = q;
      VSet u1, u2;
      if (k == 1) {
        u1 = {vertices_[p]};
        u2 = {vertices_[q]};
      } else {
        const VineEdge& ep = trees_[kk - 1][p];
        const VineEdge& eq = trees_[kk - 1][q];
        int shared = 0;
        for (int x : {ep.v1, ep.v2}) {
          shared += (x == eq.v1) + (x == eq.v2);
        }
        if (shared != 1) {
          throw std::invalid_argument(
              "vine: proximity violated by edge (" + std::to_string(p) + "," +
              std::to_string(q) + ") in tree " + std::to_string(k));
        }
        u1 = ep.complete_union;
        u2 = eq.complete_union;
      }
      e.conditioning = set_intersection_of(u1, u2);
      const VSet sa = set_difference_of(u1, e.conditioning);
      const VSet sb = set_difference_of(u2, e.conditioning);
      if (static_cast<int>(e.conditioning.size()) != k - 1 || sa.size() != 1 ||
          sb.size() != 1) {
        throw std::invalid_argument(
            "vine: proximity violated by edge (" + std::to_string(p) + "," +
            std::to_string(q) + ") in tree " + std::to_string(k));
      }
      e.a = sa[0];
      e.b = sb[0];
      if (e.b < e.a) {
        std::swap(e.a, e.b);
        std::swap(e.v1, e.v2);
      }
      e.complete_union = set_union_of(u1, u2);
      if (!uf.unite(p, q)) {
        throw std::invalid_argument("vine: cycle in tree " + std::to_string(k));
      }
      tree.push_back(std::move(e));
    }
  }
}

VineStructure VineStructure::from_labels(
    std::vector<VertexId> vertices,
    const std::vector<std::vector<VineEdge>>& labeled_trees) {
  std::map<VertexId, int> vindex;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    vindex[vertices[i]] = static_cast<int>(i);
  }
  std::vector<std::vector<std::pair<int, int>>> links(labeled_trees.size());
  // union-key -> edge index, per level; level 0 holds singleton vertices
  std::map<std::string, int> prev_unions;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    prev_unions[vset_key({vertices[i]})] = static_cast<int>(i);
  }
  for (std::size_t kk = 0; kk < labeled_trees.size(); ++kk) {
    const int k = static_cast<int>(kk) + 1;
    std::map<std::string, int> this_unions;
    std::vector<VineEdge> level;
    for (const VineEdge& given : labeled_trees[kk]) {
      VSet d = given.conditioning;
      std::sort(d.begin(), d.end());
      VSet ua = d, ub = d;
      ua.push_back(given.a);
      ub.push_back(given.b);
      std::sort(ua.begin(), ua.end());
      std::sort(ub.begin(), ub.end());
      const auto ita = prev_unions.find(vset_key(ua));
      const auto itb = prev_unions.find(vset_key(ub));
      if (ita == prev_unions.end() || itb == prev_unions.end()) {
        throw std::invalid_argument(
            "vine: cannot resolve endpoints of edge " + given.label() +
            " in tree " + std::to_string(k));
      }
      links[kk].emplace_back(ita->second, itb->second);
      VineEdge e = given;
      e.level = k;
      e.complete_union = set_union_of(ua, ub);
      const std::string key = vset_key(e.complete_union);
      if (this_unions.count(key)) {
        throw std::invalid_argument("vine: duplicate complete union " + key +
                                    " in tree " + std::to_string(k));
      }
      this_unions[key] = static_cast<int>(level.size());
      level.push_back(std::move(e));
    }
    prev_unions = std::move(this_unions);
  }
  return VineStructure(std::move(vertices), links);
}

VineStructure VineStructure::path(int d) {
  std::vector<VertexId> vertices;
  for (int j = 1; j <= d; ++j) vertices.push_back({1, j});
  std::vector<std::vector<std::pair<int, int>>> links;
  int prev = d;
  for (int k = 1; k <= d - 1; ++k) {
    std::vector<std::pair<int, int>> level;
    for (int i = 0; i + 1 < prev; ++i) level.emplace_back(i, i + 1);
    links.push_back(std::move(level));
    prev -= 1;
  }
  return VineStructure(std::move(vertices), links);
}

VineStructure VineStructure::star(int d, int root) {
  if (root < 1 || root > d) throw std::invalid_argument("star: bad root");
  std::vector<VertexId> vertices;
  for (int j = 1; j <= d; ++j) vertices.push_back({1, j});
  std::vector<std::vector<std::pair<int, int>>> links;
  // tree 1: root vertex connected to all others
  {
    std::vector<std::pair<int, int>> level;
    for (int j = 0; j < d; ++j) {
      if (j != root - 1) level.emplace_back(root - 1, j);
    }
    links.push_back(std::move(level));
  }
  // every higher tree: star rooted at the first remaining edge
  int prev = d - 1;
  for (int k = 2; k <= d - 1; ++k) {
    std::vector<std::pair<int, int>> level;
    for (int j = 1; j < prev; ++j) level.emplace_back(0, j);
    links.push_back(std::move(level));
    prev -= 1;
  }
  return VineStructure(std::move(vertices), links);
}

int VineStructure::max_time() const {
  int t = 0;
  for (const auto& v : vertices_) t = std::max(t, v.time);
  return t;
}

int VineStructure::vars_per_time() const {
  std::map<int, std::set<int>> per_time;
  for (const auto& v : vertices_) per_time[v.time].insert(v.var);
  const auto& first = per_time.begin()->second;
  for (const auto& [t, vars] : per_time) {
    if (vars != first) {
      throw std::logic_error("vine: vertex set is not a (time x var) grid");
    }
  }
  return static_cast<int>(first.size());
}

const std::vector<VertexId>& VineStructure::complete_union_of(
    int level, int edge_idx) const {
  return trees_.at(level - 1).at(edge_idx).complete_union;
}

GraphSequence VineStructure::restrict(int t, int m) const {
  const int T = max_time();
  if (t < 1 || t > T || m < 0 || m > T - t) {
    throw std::out_of_range("restrict: window out of range");
  }
  GraphSequence g;
  g.t_start = t;
  g.t_end = t + m;
  g.source = this;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (vertices_[i].time >= t && vertices_[i].time <= t + m) {
      g.kept_vertices.push_back(static_cast<int>(i));
    }
  }
  g.kept_edges.resize(trees_.size());
  for (std::size_t kk = 0; kk < trees_.size(); ++kk) {
    for (std::size_t ei = 0; ei < trees_[kk].size(); ++ei) {
      const auto& u = trees_[kk][ei].complete_union;
      // sorted by (time, var): front/back carry the extreme times
      if (u.front().time >= t && u.back().time <= t + m) {
        g.kept_edges[kk].push_back(static_cast<int>(ei));
      }
    }
  }
  return g;
}

bool is_vine(const GraphSequence& g, std::string* why) {
  const int dw = static_cast<int>(g.kept_vertices.size());
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  for (int k = 1; k <= dw - 1; ++k) {
    const auto kept =
        k <= static_cast<int>(g.kept_edges.size())
            ? g.kept_edges[k - 1]
            : std::vector<int>{};
    if (static_cast<int>(kept.size()) != dw - k) {
      return fail("level " + std::to_string(k) + " has " +
                  std::to_string(kept.size()) + " edges, expected " +
                  std::to_string(dw - k));
    }
    // map surviving previous-level items to union-find slots
    std::map<int, int> slot;
    if (k == 1) {
      for (int v : g.kept_vertices) slot[v] = static_cast<int>(slot.size());
    } else {
      for (int e : g.kept_edges[k - 2]) slot[e] = static_cast<int>(slot.size());
    }
    UnionFind uf(static_cast<int>(slot.size()));
    for (int ei : kept) {
      const VineEdge& e = g.source->tree(k)[ei];
      const auto it1 = slot.find(e.v1), it2 = slot.find(e.v2);
      if (it1 == slot.end() || it2 == slot.end()) {
        return fail("level " + std::to_string(k) + ": dangling endpoint");
      }
      if (!uf.unite(it1->second, it2->second)) {
        return fail("level " + std::to_string(k) + ": cycle");
      }
    }
  }
  return true;
}

bool is_translation(const GraphSequence& g1, const GraphSequence& g2) {
  if (g1.t_end - g1.t_start != g2.t_end - g2.t_start) return false;
  if (g1.kept_vertices.size() != g2.kept_vertices.size()) return false;
  const int tau = g2.t_start - g1.t_start;
  const std::size_t levels = std::max(g1.kept_edges.size(), g2.kept_edges.size());
  for (std::size_t kk = 0; kk < levels; ++kk) {
    std::vector<std::string> l1, l2;
    if (kk < g1.kept_edges.size()) {
      for (int ei : g1.kept_edges[kk]) {
        l1.push_back(
            shift_edge(g1.source->trees()[kk][ei], tau).label());
      }
    }
    if (kk < g2.kept_edges.size()) {
      for (int ei : g2.kept_edges[kk]) {
        l2.push_back(g2.source->trees()[kk][ei].label());
      }
    }
    std::sort(l1.begin(), l1.end());
    std::sort(l2.begin(), l2.end());
    if (l1 != l2) return false;
  }
  return true;
}

StationarityReport is_stationary_vine(const VineStructure& vine) {
  const int T = vine.max_time();
  vine.vars_per_time();  // throws unless the vertex set is a grid
  for (int m = 0; m < T; ++m) {
    const GraphSequence ref = vine.restrict(1, m);
    if (!is_vine(ref)) return {false, 1, m};
    for (int t = 2; t + m <= T; ++t) {
      const GraphSequence g = vine.restrict(t, m);
      if (!is_vine(g) || !is_translation(g, ref)) return {false, t, m};
    }
  }
  return {true, 0, 0};
}

// --- compatible permutations ----------------------------------------------------

namespace {

bool step_has_edge(const VineStructure& cs, const std::vector<int>& prefix,
                   int candidate) {
  // need an edge in tree |prefix| with conditioned {candidate, i_r} and
  // conditioning {prefix} \ {i_r}
  const int k = static_cast<int>(prefix.size()) + 1;
  if (k == 1) return true;
  if (k - 1 > cs.num_trees()) return false;
  std::set<int> pref(prefix.begin(), prefix.end());
  for (const VineEdge& e : cs.tree(k - 1)) {
    int other;
    if (e.a.var == candidate) {
      other = e.b.var;
    } else if (e.b.var == candidate) {
      other = e.a.var;
    } else {
      continue;
    }
    if (!pref.count(other)) continue;
    std::set<int> want = pref;
    want.erase(other);
    std::set<int> have;
    for (const auto& v : e.conditioning) have.insert(v.var);
    if (want == have) return true;
  }
  return false;
}

bool extendable_rec(const VineStructure& cs, std::vector<int>& prefix,
                    std::vector<char>& used, int d) {
  if (static_cast<int>(prefix.size()) == d) return true;
  for (int c = 1; c <= d; ++c) {
    if (used[c]) continue;
    if (!step_has_edge(cs, prefix, c)) continue;
    used[c] = 1;
    prefix.push_back(c);
    if (extendable_rec(cs, prefix, used, d)) {
      prefix.pop_back();
      used[c] = 0;
      return true;
    }
    prefix.pop_back();
    used[c] = 0;
  }
  return false;
}

void enumerate_rec(const VineStructure& cs, std::vector<int>& prefix,
                   std::vector<char>& used, int d,
                   std::vector<std::vector<int>>& out) {
  if (static_cast<int>(prefix.size()) == d) {
    out.push_back(prefix);
    return;
  }
  for (int c = 1; c <= d; ++c) {
    if (used[c]) continue;
    if (!step_has_edge(cs, prefix, c)) continue;
    used[c] = 1;
    prefix.push_back(c);
    enumerate_rec(cs, prefix, used, d, out);
    prefix.pop_back();
    used[c] = 0;
  }
}

}  // namespace

bool is_compatible(const VineStructure& cross_section,
                   const std::vector<int>& perm) {
  const int d = cross_section.num_vertices();
  if (static_cast<int>(perm.size()) != d) return false;
  std::vector<char> seen(d + 1, 0);
  for (int p : perm) {
    if (p < 1 || p > d || seen[p]) return false;
    seen[p] = 1;
  }
  std::vector<int> prefix;
  for (int k = 0; k < d; ++k) {
    if (!step_has_edge(cross_section, prefix, perm[k])) return false;
    prefix.push_back(perm[k]);
  }
  return true;
}

bool is_prefix_extendable(const VineStructure& cross_section,
                          const std::vector<int>& prefix) {
  const int d = cross_section.num_vertices();
  std::vector<char> used(d + 1, 0);
  std::vector<int> p;
  for (int i = 0; i < static_cast<int>(prefix.size()); ++i) {
    if (!step_has_edge(cross_section, p, prefix[i])) return false;
    used[prefix[i]] = 1;
    p.push_back(prefix[i]);
  }
  return extendable_rec(cross_section, p, used, d);
}

std::vector<std::vector<int>> enumerate_compatible(
    const VineStructure& cross_section, std::optional<int> first) {
  const int d = cross_section.num_vertices();
  if (d > 10) {
    throw std::domain_error(
        "enumerate_compatible: d > 10 is combinatorially infeasible; "
        "check individual permutations with is_compatible instead");
  }
  std::vector<std::vector<int>> out;
  std::vector<int> prefix;
  std::vector<char> used(d + 1, 0);
  if (first) {
    if (*first < 1 || *first > d) {
      throw std::invalid_argument("enumerate_compatible: bad first index");
    }
    used[*first] = 1;
    prefix.push_back(*first);
    enumerate_rec(cross_section, prefix, used, d, out);
  } else {
    enumerate_rec(cross_section, prefix, used, d, out);
  }
  return out;
}

// --- S-vine construction -----------------------------------------------------------

void SVineSpec::validate() const {
  const int d = dim();
  if (markov_order < 0) throw std::domain_error("spec: markov_order < 0");
  if (cross_section.max_time() != 1 || cross_section.vars_per_time() != d) {
    throw std::domain_error("spec: cross-section must live on one time point");
  }
  if (!is_compatible(cross_section, in_perm)) {
    throw std::domain_error("spec: in_perm is not compatible");
  }
  if (!is_compatible(cross_section, out_perm)) {
    throw std::domain_error("spec: out_perm is not compatible");
  }
}

namespace {

// Resolve a level of labeled edges against the already-resolved level below.
std::vector<std::pair<int, int>> resolve_links(
    const std::map<std::string, int>& prev_unions,
    const std::vector<VineEdge>& labels) {
  std::vector<std::pair<int, int>> links;
  links.reserve(labels.size());
  for (const VineEdge& e : labels) {
    VSet ua = e.conditioning, ub = e.conditioning;
    ua.push_back(e.a);
    ub.push_back(e.b);
    std::sort(ua.begin(), ua.end());
    std::sort(ub.begin(), ub.end());
    const auto ita = prev_unions.find(vset_key(ua));
    const auto itb = prev_unions.find(vset_key(ub));
    if (ita == prev_unions.end() || itb == prev_unions.end()) {
      throw std::logic_error("build_svine: cannot resolve edge " + e.label());
    }
    links.emplace_back(ita->second, itb->second);
  }
  return links;
}

}  // namespace

VineStructure build_svine(const SVineSpec& spec, int T) {
  spec.validate();
  if (T < 1) throw std::domain_error("build_svine: T must be >= 1");
  const int d = spec.dim();
  const auto& in = spec.in_perm;
  const auto& out = spec.out_perm;

  std::vector<VertexId> vertices;
  for (int t = 1; t <= T; ++t) {
    for (int j = 1; j <= d; ++j) vertices.push_back({t, j});
  }
  const int total_levels = T * d - 1;

  std::vector<std::vector<std::pair<int, int>>> links;
  // union key -> index for the level below the one being resolved
  std::map<std::string, int> prev_unions;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    prev_unions[vset_key({vertices[i]})] = static_cast<int>(i);
  }
  // resolved edges of the previous level (for continuation adjacency)
  std::vector<VineEdge> prev_edges;

  auto finish_level = [&](std::vector<VineEdge> labels) {
    links.push_back(resolve_links(prev_unions, labels));
    std::map<std::string, int> unions;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      // complete union of the new edge
      VSet u = labels[i].conditioning;
      u.push_back(labels[i].a);
      u.push_back(labels[i].b);
      std::sort(u.begin(), u.end());
      labels[i].complete_union = std::move(u);
      labels[i].v1 = links.back()[i].first;
      labels[i].v2 = links.back()[i].second;
      unions[vset_key(labels[i].complete_union)] = static_cast<int>(i);
    }
    prev_unions = std::move(unions);
    prev_edges = std::move(labels);
  };

  // trees 1..d: cross-sectional copies plus the explicit cross-edge formula
  for (int k = 1; k <= std::min(d, total_levels); ++k) {
    std::vector<VineEdge> labels;
    if (k <= d - 1) {
      for (int t = 1; t <= T; ++t) {
        for (const VineEdge& ce : spec.cross_section.tree(k)) {
          VineEdge e;
          e.level = k;
          e.a = {t, ce.a.var};
          e.b = {t, ce.b.var};
          for (const auto& v : ce.conditioning) e.conditioning.push_back({t, v.var});
          std::sort(e.conditioning.begin(), e.conditioning.end());
          if (e.b < e.a) std::swap(e.a, e.b);
          labels.push_back(std::move(e));
        }
      }
    }
    for (int t = 1; t + 1 <= T; ++t) {
      for (int r = 1; r <= k; ++r) {
        VineEdge e;
        e.level = k;
        e.a = {t, in[k - r]};
        e.b = {t + 1, out[r - 1]};
        for (int s = 1; s <= k - r; ++s) e.conditioning.push_back({t, in[s - 1]});
        for (int s = 1; s <= r - 1; ++s) {
          e.conditioning.push_back({t + 1, out[s - 1]});
        }
        std::sort(e.conditioning.begin(), e.conditioning.end());
        if (e.b < e.a) std::swap(e.a, e.b);
        labels.push_back(std::move(e));
      }
    }
    finish_level(std::move(labels));
  }

  // trees d+1 .. Td-1: unique proximity-consistent continuation; translation
  // classes with the smallest time gap enter first
  for (int k = d + 1; k <= total_levels; ++k) {
    const int prev_count = static_cast<int>(prev_edges.size());
    // adjacency: previous edges sharing an endpoint
    std::map<int, std::vector<int>> incident;
    for (int i = 0; i < prev_count; ++i) {
      incident[prev_edges[i].v1].push_back(i);
      incident[prev_edges[i].v2].push_back(i);
    }
    struct Candidate {
      VineEdge edge;
      int i, j;
    };
    std::map<std::string, std::vector<Candidate>> by_class;
    std::set<std::pair<int, int>> seen;
    for (const auto& [vert, inc] : incident) {
      for (std::size_t x = 0; x < inc.size(); ++x) {
        for (std::size_t y = x + 1; y < inc.size(); ++y) {
          const int i = std::min(inc[x], inc[y]);
          const int j = std::max(inc[x], inc[y]);
          if (!seen.insert({i, j}).second) continue;
          const VSet& u1 = prev_edges[i].complete_union;
          const VSet& u2 = prev_edges[j].complete_union;
          VineEdge e;
          e.level = k;
          e.conditioning = set_intersection_of(u1, u2);
          if (static_cast<int>(e.conditioning.size()) != k - 1) continue;
          const VSet sa = set_difference_of(u1, e.conditioning);
          const VSet sb = set_difference_of(u2, e.conditioning);
          if (sa.size() != 1 || sb.size() != 1) continue;
          e.a = sa[0];
          e.b = sb[0];
          if (e.b < e.a) std::swap(e.a, e.b);
          by_class[edge_class_key(e)].push_back({std::move(e), i, j});
        }
      }
    }
    std::vector<std::string> class_order;
    for (const auto& [key, cands] : by_class) class_order.push_back(key);
    std::sort(class_order.begin(), class_order.end(),
              [&](const std::string& x, const std::string& y) {
                const int sx = by_class[x].front().edge.lag_span();
                const int sy = by_class[y].front().edge.lag_span();
                if (sx != sy) return sx < sy;
                return x < y;
              });

    UnionFind uf(prev_count);
    std::vector<VineEdge> labels;
    const int needed = prev_count - 1;
    for (const std::string& key : class_order) {
      if (static_cast<int>(labels.size()) == needed) break;
      auto cands = by_class[key];
      std::sort(cands.begin(), cands.end(),
                [](const Candidate& a, const Candidate& b) {
                  return min_time(a.edge) < min_time(b.edge);
                });
      UnionFind trial = uf;
      bool ok = true;
      for (const auto& c : cands) {
        if (!trial.unite(c.i, c.j)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      uf = std::move(trial);
      for (auto& c : cands) labels.push_back(std::move(c.edge));
    }
    if (static_cast<int>(labels.size()) != needed) {
      throw std::logic_error("build_svine: continuation failed at tree " +
                             std::to_string(k));
    }
    finish_level(std::move(labels));
  }

  return VineStructure(std::move(vertices), links);
}

// --- translation classes -----------------------------------------------------------

EdgeClassing edge_classes(const VineStructure& vine) {
  EdgeClassing out;
  std::map<std::string, int> index;
  out.edge_class.resize(vine.num_trees());
  for (int k = 1; k <= vine.num_trees(); ++k) {
    for (const VineEdge& e : vine.tree(k)) {
      const std::string key = edge_class_key(e);
      auto it = index.find(key);
      if (it == index.end()) {
        EdgeClass cls;
        cls.key = key;
        cls.level = k;
        cls.lag_span = e.lag_span();
        cls.representative = shift_edge(e, 1 - min_time(e));
        it = index.emplace(key, static_cast<int>(out.classes.size())).first;
        out.classes.push_back(std::move(cls));
      }
      out.edge_class[k - 1].push_back(it->second);
    }
  }
  return out;
}

std::vector<std::string> markov_truncate(const VineStructure& vine, int p) {
  std::vector<std::string> out;
  for (const EdgeClass& cls : edge_classes(vine).classes) {
    if (cls.lag_span > p) out.push_back(cls.key);
  }
  return out;
}

std::uint64_t count_distinct_copulas(int T, int d, CopulaCountMode mode,
                                     int p) {
  if (T < 1 || d < 1) throw std::domain_error("count: T, d must be >= 1");
  const std::uint64_t tt = static_cast<std::uint64_t>(T);
  const std::uint64_t dd = static_cast<std::uint64_t>(d);
  switch (mode) {
    case CopulaCountMode::general:
      return tt * dd * (tt * dd - 1) / 2;
    case CopulaCountMode::stationary:
      return (tt - 1) * dd * dd + dd * (dd - 1) / 2;
    case CopulaCountMode::markov:
      if (p < 0 || p > T - 1) {
        throw std::domain_error("count: need 0 <= p <= T-1");
      }
      return static_cast<std::uint64_t>(p) * dd * dd + dd * (dd - 1) / 2;
  }
  throw std::logic_error("count: unknown mode");
}

// --- serialization -------------------------------------------------------------------

namespace {

nlohmann::json vertex_json(const VertexId& v) {
  return nlohmann::json::array({v.time, v.var});
}

VertexId vertex_from_json(const nlohmann::json& j) {
  return {j.at(0).get<int>(), j.at(1).get<int>()};
}

nlohmann::json edge_json(const VineEdge& e) {
  nlohmann::json j;
  j["conditioned"] = nlohmann::json::array({vertex_json(e.a), vertex_json(e.b)});
  auto d = nlohmann::json::array();
  for (const auto& v : e.conditioning) d.push_back(vertex_json(v));
  j["conditioning"] = d;
  return j;
}

VineEdge edge_from_json(const nlohmann::json& j) {
  VineEdge e;
  e.a = vertex_from_json(j.at("conditioned").at(0));
  e.b = vertex_from_json(j.at("conditioned").at(1));
  for (const auto& v : j.at("conditioning")) {
    e.conditioning.push_back(vertex_from_json(v));
  }
  std::sort(e.conditioning.begin(), e.conditioning.end());
  if (e.b < e.a) std::swap(e.a, e.b);
  return e;
}

nlohmann::json trees_json(const std::vector<std::vector<VineEdge>>& trees) {
  auto out = nlohmann::json::array();
  for (const auto& tree : trees) {
    auto level = nlohmann::json::array();
    for (const auto& e : tree) level.push_back(edge_json(e));
    out.push_back(level);
  }
  return out;
}

std::vector<std::vector<VineEdge>> trees_from_json(const nlohmann::json& j) {
  std::vector<std::vector<VineEdge>> trees;
  for (const auto& level : j) {
    std::vector<VineEdge> tree;
    for (const auto& e : level) tree.push_back(edge_from_json(e));
    trees.push_back(std::move(tree));
  }
  return trees;
}

}  // namespace

std::string VineStructure::to_json_string() const {
  nlohmann::json j;
  auto verts = nlohmann::json::array();
  for (const auto& v : vertices_) verts.push_back(vertex_json(v));
  j["vertices"] = verts;
  j["trees"] = trees_json(trees_);
  return j.dump();
}

VineStructure VineStructure::from_json_string(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  std::vector<VertexId> vertices;
  for (const auto& v : j.at("vertices")) vertices.push_back(vertex_from_json(v));
  return from_labels(std::move(vertices), trees_from_json(j.at("trees")));
}

std::string SVineSpec::to_json_string() const {
  nlohmann::json j;
  j["d"] = dim();
  j["markov_order"] = markov_order;
  j["cross_section"] = trees_json(cross_section.trees());
  j["in_perm"] = in_perm;
  j["out_perm"] = out_perm;
  return j.dump();
}

SVineSpec SVineSpec::from_json_string(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  SVineSpec spec;
  const int d = j.at("d").get<int>();
  std::vector<VertexId> vertices;
  for (int v = 1; v <= d; ++v) vertices.push_back({1, v});
  spec.cross_section = VineStructure::from_labels(
      std::move(vertices), trees_from_json(j.at("cross_section")));
  spec.in_perm = j.at("in_perm").get<std::vector<int>>();
  spec.out_perm = j.at("out_perm").get<std::vector<int>>();
  spec.markov_order = j.at("markov_order").get<int>();
  spec.validate();
  return spec;
}

}  // namespace svine
