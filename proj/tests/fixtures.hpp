#pragma once

// Shared fixtures for unit and acceptance tests: reference structures,
// random vine generation, and small model builders.

#include <functional>
#include <map>
#include <vector>

#include "svine/estimation.hpp"
#include "svine/vine.hpp"

namespace svine::testing {

/// Random R-vine on d variables: a random spanning tree per level over the
/// proximity-admissible pairs.
inline VineStructure random_rvine(int d, stats::Rng& rng) {
  std::vector<VertexId> verts;
  for (int j = 1; j <= d; ++j) verts.push_back({1, j});
  std::vector<std::vector<std::pair<int, int>>> links;
  int n = d;
  std::vector<std::pair<int, int>> prev_ep;
  for (int k = 1; k <= d - 1; ++k) {
    std::vector<std::pair<int, int>> cand;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (k == 1) {
          cand.push_back({i, j});
          continue;
        }
        int share = 0;
        for (int x : {prev_ep[i].first, prev_ep[i].second}) {
          share += (x == prev_ep[j].first) + (x == prev_ep[j].second);
        }
        if (share == 1) cand.push_back({i, j});
      }
    }
    for (int i = static_cast<int>(cand.size()) - 1; i > 0; --i) {
      std::swap(cand[i], cand[rng.uniform_int(i + 1)]);
    }
    std::vector<int> par(n);
    for (int i = 0; i < n; ++i) par[i] = i;
    std::function<int(int)> find = [&](int x) {
      while (par[x] != x) x = par[x] = par[par[x]];
      return x;
    };
    std::vector<std::pair<int, int>> lvl;
    for (const auto& c : cand) {
      if (static_cast<int>(lvl.size()) == n - 1) break;
      const int a = find(c.first), b = find(c.second);
      if (a == b) continue;
      par[a] = b;
      lvl.push_back(c);
    }
    links.push_back(lvl);
    prev_ep = lvl;
    n -= 1;
  }
  return VineStructure(verts, links);
}

/// The d = 2, T = 3 C-vine-rooted serial structure whose two-point window
/// restriction disconnects: the canonical non-stationary example.
inline VineStructure copar_fixture() {
  auto E = [](VertexId a, VertexId b, std::vector<VertexId> d) {
    VineEdge e;
    e.a = a;
    e.b = b;
    e.conditioning = std::move(d);
    return e;
  };
  std::vector<VertexId> verts;
  for (int t = 1; t <= 3; ++t) {
    verts.push_back({t, 1});
    verts.push_back({t, 2});
  }
  std::vector<std::vector<VineEdge>> trees;
  trees.push_back({E({1, 1}, {1, 2}, {}), E({2, 1}, {2, 2}, {}),
                   E({3, 1}, {3, 2}, {}), E({1, 1}, {2, 1}, {}),
                   E({2, 1}, {3, 1}, {})});
  trees.push_back({E({1, 2}, {2, 1}, {{1, 1}}), E({1, 1}, {2, 2}, {{2, 1}}),
                   E({1, 1}, {3, 1}, {{2, 1}}), E({2, 1}, {3, 2}, {{3, 1}})});
  trees.push_back({E({1, 2}, {2, 2}, {{1, 1}, {2, 1}}),
                   E({2, 2}, {3, 1}, {{1, 1}, {2, 1}}),
                   E({1, 1}, {3, 2}, {{2, 1}, {3, 1}})});
  trees.push_back({E({1, 2}, {3, 1}, {{1, 1}, {2, 1}, {2, 2}}),
                   E({2, 2}, {3, 2}, {{1, 1}, {2, 1}, {3, 1}})});
  trees.push_back({E({1, 2}, {3, 2}, {{1, 1}, {2, 1}, {2, 2}, {3, 1}})});
  return VineStructure::from_labels(verts, trees);
}

/// M-vine spec: path cross-section, equal permutations.
inline SVineSpec mvine_spec(int d, int p = 1) {
  SVineSpec spec;
  spec.cross_section = d == 1
                           ? VineStructure(std::vector<VertexId>{{1, 1}}, {})
                           : VineStructure::path(d);
  spec.in_perm.resize(d);
  spec.out_perm.resize(d);
  for (int j = 0; j < d; ++j) spec.in_perm[j] = spec.out_perm[j] = j + 1;
  spec.markov_order = p;
  return spec;
}

/// Gaussian model on the M-vine: one correlation for cross-sectional classes,
/// another for all serial classes.
inline SVineModel gaussian_mvine_model(int d, int p, double rho_cs,
                                       double rho_lag) {
  SVineModel m;
  m.spec = mvine_spec(d, p);
  m.mode = MarginMode::semiparametric;
  WindowVine wv(m.spec, p + 1);
  for (const auto& cls : wv.classes()) {
    const double rho = cls.lag_span == 0 ? rho_cs : rho_lag;
    m.copulas.emplace(cls.key, BivariateCopula(FamilyTag{Family::gaussian, 0},
                                               std::vector<double>{rho}));
  }
  return m;
}

/// Brute-force oracle for compatible permutations: filter all d! orderings
/// through the definition check.
inline std::vector<std::vector<int>> brute_force_compatible(
    const VineStructure& cs) {
  const int d = cs.num_vertices();
  std::vector<int> perm(d);
  for (int j = 0; j < d; ++j) perm[j] = j + 1;
  std::vector<std::vector<int>> out;
  do {
    if (is_compatible(cs, perm)) out.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

inline std::vector<double> matrix_column(const Matrix& m, int c) {
  std::vector<double> col(m.rows);
  for (int r = 0; r < m.rows; ++r) col[r] = m.at(r, c);
  return col;
}

}  // namespace svine::testing
