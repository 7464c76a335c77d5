#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "fixtures.hpp"
#include "svine/vine.hpp"

using namespace svine;
using namespace svine::testing;

namespace {

std::set<std::string> first_tree_labels(const VineStructure& v) {
  std::set<std::string> out;
  for (const auto& e : v.tree(1)) out.insert(e.label());
  return out;
}

}  // namespace

TEST_CASE("five-dimensional path vine carries the reference labels", "[vine]") {
  const auto dv = VineStructure::path(5);
  // tree 2 edge joining {1,2} and {2,3} is (1,3|2)
  REQUIRE(dv.tree(2)[0].label() == "1.1,1.3|1.2");
  // top edge is (1,5|2,3,4)
  REQUIRE(dv.tree(4)[0].label() == "1.1,1.5|1.2;1.3;1.4");
  // first-tree conditioning sets are empty
  for (const auto& e : dv.tree(1)) REQUIRE(e.conditioning.empty());
  // complete unions
  REQUIRE(dv.complete_union_of(2, 0) ==
          std::vector<VertexId>{{1, 1}, {1, 2}, {1, 3}});
  REQUIRE(dv.complete_union_of(4, 0) ==
          std::vector<VertexId>{{1, 1}, {1, 2}, {1, 3}, {1, 4}, {1, 5}});
  for (const auto& e : dv.tree(1)) {
    REQUIRE(e.complete_union == std::vector<VertexId>{e.a, e.b});
  }
}

TEST_CASE("proximity violations are rejected with the offending edge",
          "[vine]") {
  // tree 1: star at vertex 0; tree 2 tries to join two edges not sharing one
  std::vector<VertexId> verts = {{1, 1}, {1, 2}, {1, 3}, {1, 4}};
  std::vector<std::vector<std::pair<int, int>>> links = {
      {{0, 1}, {0, 2}, {0, 3}}, {{0, 1}, {1, 2}}};
  REQUIRE_NOTHROW(VineStructure(verts, links));  // star shares the hub
  // a path 1-2-3-4: edges (0,1),(1,2),(2,3); edges 0 and 2 share nothing
  links = {{{0, 1}, {1, 2}, {2, 3}}, {{0, 2}, {1, 2}}};
  REQUIRE_THROWS_WITH(VineStructure(verts, links),
                      Catch::Matchers::ContainsSubstring("proximity"));
}

TEST_CASE("restriction keeps whole windows and preserves gaps", "[vine]") {
  const auto spec = mvine_spec(3, 1);
  const auto vine = build_svine(spec, 4);
  SECTION("full window reproduces the vine") {
    const auto g = vine.restrict(1, 3);
    for (int k = 1; k <= vine.num_trees(); ++k) {
      REQUIRE(g.kept_edges[k - 1].size() == vine.tree(k).size());
    }
    REQUIRE(is_vine(g));
  }
  SECTION("single-point windows are the cross-section") {
    for (int t = 1; t <= 4; ++t) {
      const auto g = vine.restrict(t, 0);
      REQUIRE(g.kept_vertices.size() == 3);
      REQUIRE(g.kept_edges[0].size() == 2);
      REQUIRE(is_vine(g));
      REQUIRE(is_translation(g, vine.restrict(1, 0)));
    }
  }
  SECTION("window bounds are validated") {
    REQUIRE_THROWS_AS(vine.restrict(0, 1), std::out_of_range);
    REQUIRE_THROWS_AS(vine.restrict(2, 3), std::out_of_range);
  }
}

TEST_CASE("the serial C-vine fixture restriction disconnects", "[vine]") {
  const auto copar = copar_fixture();
  // second level of the (2,3) window keeps one edge for three vertices
  const auto g = copar.restrict(2, 1);
  REQUIRE(g.kept_edges[0].size() == 3);
  REQUIRE(g.kept_edges[1].size() == 1);
  std::string why;
  REQUIRE_FALSE(is_vine(g, &why));
  REQUIRE_THAT(why, Catch::Matchers::ContainsSubstring("level 2"));
  // ... while the (1,2) window is a proper vine
  REQUIRE(is_vine(copar.restrict(1, 1)));
}

TEST_CASE("translation detection", "[vine]") {
  const auto spec = mvine_spec(4, 1);
  const auto vine = build_svine(spec, 3);
  const auto g12 = vine.restrict(1, 1);
  const auto g23 = vine.restrict(2, 1);
  REQUIRE(is_translation(g12, g12));
  REQUIRE(is_translation(g12, g23));
  REQUIRE(is_translation(g23, g12));
  const auto copar = copar_fixture();
  REQUIRE_FALSE(is_translation(copar.restrict(1, 1), copar.restrict(2, 1)));
}

TEST_CASE("stationarity verdicts with witnesses", "[vine]") {
  SECTION("M-vine and long D-vine structures are stationary") {
    for (int d : {1, 2, 4}) {
      auto spec = mvine_spec(d, 1);
      REQUIRE(is_stationary_vine(build_svine(spec, 3)).stationary);
      if (d >= 2) {
        // reversed in-permutation gives the long D-vine
        std::reverse(spec.in_perm.begin(), spec.in_perm.end());
        REQUIRE(is_stationary_vine(build_svine(spec, 3)).stationary);
      }
    }
  }
  SECTION("the serial C-vine fixture fails at window (2,1)") {
    const auto rep = is_stationary_vine(copar_fixture());
    REQUIRE_FALSE(rep.stationary);
    REQUIRE(rep.witness_t == 2);
    REQUIRE(rep.witness_m == 1);
  }
}

TEST_CASE("compatible permutations on the path vine", "[vine]") {
  const auto dv = VineStructure::path(5);
  REQUIRE(is_compatible(dv, {1, 2, 3, 4, 5}));
  REQUIRE_FALSE(is_compatible(dv, {1, 3, 2, 4, 5}));
  // block must stay contiguous with the new element at its border
  REQUIRE(is_compatible(dv, {3, 2, 4, 1, 5}));
  REQUIRE(is_compatible(dv, {3, 4, 2, 5, 1}));
  REQUIRE_FALSE(is_compatible(dv, {2, 4, 3, 1, 5}));
}

TEST_CASE("identity is compatible with a star rooted at one", "[vine]") {
  const auto cv = VineStructure::star(5, 1);
  REQUIRE(is_compatible(cv, {1, 2, 3, 4, 5}));
}

TEST_CASE("enumeration agrees with the brute-force definition check",
          "[vine]") {
  SECTION("two variables have both orders") {
    std::vector<std::vector<int>> want = {{1, 2}, {2, 1}};
    REQUIRE(enumerate_compatible(VineStructure::path(2)) == want);
  }
  SECTION("path vine against all 120 permutations") {
    const auto dv = VineStructure::path(5);
    auto got = enumerate_compatible(dv);
    auto want = brute_force_compatible(dv);
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    REQUIRE(got == want);
    REQUIRE(got.size() == 16);  // one start anywhere, then extend left/right
  }
  SECTION("random vines up to d = 6") {
    stats::Rng rng(99, 0);
    for (int d = 3; d <= 6; ++d) {
      for (int rep = 0; rep < 3; ++rep) {
        const auto cs = random_rvine(d, rng);
        auto got = enumerate_compatible(cs);
        auto want = brute_force_compatible(cs);
        std::sort(got.begin(), got.end());
        std::sort(want.begin(), want.end());
        REQUIRE(got == want);
        REQUIRE(got.size() >= static_cast<std::size_t>(d));
      }
    }
  }
  SECTION("a fixed first element always leaves a completion") {
    stats::Rng rng(5, 0);
    const auto cs = random_rvine(6, rng);
    for (int first = 1; first <= 6; ++first) {
      REQUIRE_FALSE(enumerate_compatible(cs, first).empty());
    }
  }
  SECTION("dimension guard") {
    REQUIRE_THROWS_AS(enumerate_compatible(VineStructure::path(11)),
                      std::domain_error);
  }
}

TEST_CASE("explicit construction reproduces the reference first trees",
          "[vine]") {
  SECTION("equal permutations give the M-pattern") {
    const auto vine = build_svine(mvine_spec(4, 1), 3);
    std::set<std::string> want;
    for (int t = 1; t <= 3; ++t) {
      for (int j = 1; j <= 3; ++j) {
        want.insert(std::to_string(t) + "." + std::to_string(j) + "," +
                    std::to_string(t) + "." + std::to_string(j + 1) + "|");
      }
    }
    want.insert("1.1,2.1|");
    want.insert("2.1,3.1|");
    REQUIRE(first_tree_labels(vine) == want);
  }
  SECTION("reversed in-permutation gives the long-path pattern") {
    auto spec = mvine_spec(4, 1);
    spec.in_perm = {4, 3, 2, 1};
    const auto vine = build_svine(spec, 3);
    std::set<std::string> want;
    for (int t = 1; t <= 3; ++t) {
      for (int j = 1; j <= 3; ++j) {
        want.insert(std::to_string(t) + "." + std::to_string(j) + "," +
                    std::to_string(t) + "." + std::to_string(j + 1) + "|");
      }
    }
    want.insert("1.4,2.1|");
    want.insert("2.4,3.1|");
    REQUIRE(first_tree_labels(vine) == want);
  }
  SECTION("one variable gives the chain") {
    const auto vine = build_svine(mvine_spec(1, 1), 5);
    REQUIRE(vine.num_trees() == 4);
    REQUIRE(vine.tree(1).size() == 4);
    REQUIRE(first_tree_labels(vine) ==
            std::set<std::string>{"1.1,2.1|", "2.1,3.1|", "3.1,4.1|",
                                  "4.1,5.1|"});
    REQUIRE(is_stationary_vine(vine).stationary);
  }
}

TEST_CASE("markov truncation marks exactly the long-lag classes", "[vine]") {
  const auto vine = build_svine(mvine_spec(2, 1), 3);
  SECTION("no truncation at the largest window") {
    REQUIRE(markov_truncate(vine, 2).empty());
  }
  SECTION("order zero marks every cross-time class") {
    const auto marked = markov_truncate(vine, 0);
    const auto all = edge_classes(vine);
    std::size_t cross = 0;
    for (const auto& c : all.classes) cross += c.lag_span > 0 ? 1 : 0;
    REQUIRE(marked.size() == cross);
    REQUIRE_FALSE(marked.empty());
  }
  SECTION("order one marks the d^2 lag-2 classes") {
    const auto marked = markov_truncate(vine, 1);
    REQUIRE(marked.size() == 4);
    for (const auto& key : marked) {
      bool found = false;
      for (const auto& c : edge_classes(vine).classes) {
        if (c.key == key) {
          REQUIRE(c.lag_span == 2);
          found = true;
        }
      }
      REQUIRE(found);
    }
  }
}

TEST_CASE("distinct pair-copula counts", "[vine]") {
  using M = CopulaCountMode;
  REQUIRE(count_distinct_copulas(100, 5, M::general) == 124750);
  REQUIRE(count_distinct_copulas(100, 5, M::stationary) == 2485);
  REQUIRE(count_distinct_copulas(100, 5, M::markov, 2) == 60);
  REQUIRE(count_distinct_copulas(100, 5, M::markov, 1) == 35);
  REQUIRE(count_distinct_copulas(100, 20, M::general) == 1999000);
  REQUIRE(count_distinct_copulas(100, 20, M::stationary) == 39790);
  REQUIRE(count_distinct_copulas(1000, 20, M::markov, 2) == 990);
  REQUIRE(count_distinct_copulas(1000, 20, M::markov, 1) == 590);
  REQUIRE(count_distinct_copulas(1, 2, M::general) == 1);
  REQUIRE(count_distinct_copulas(1, 2, M::stationary) == 1);
  REQUIRE_THROWS_AS(count_distinct_copulas(5, 2, M::markov, 5),
                    std::domain_error);
}

TEST_CASE("translation classes partition the edges", "[vine]") {
  SECTION("M-vine class count matches the stationary formula") {
    const auto vine = build_svine(mvine_spec(2, 1), 3);
    const auto cls = edge_classes(vine);
    REQUIRE(cls.classes.size() ==
            count_distinct_copulas(3, 2, CopulaCountMode::stationary));
    // first tree: the two cross-sectional edges share one class
    const auto& t1 = cls.edge_class[0];
    std::map<std::string, int> per_label;
    for (std::size_t i = 0; i < vine.tree(1).size(); ++i) {
      per_label[edge_class_key(vine.tree(1)[i])] = t1[i];
    }
    REQUIRE(per_label.at("1.1,1.2|") >= 0);
    int cs_class = per_label.at("1.1,1.2|");
    int n_cs = 0;
    for (std::size_t i = 0; i < vine.tree(1).size(); ++i) {
      if (t1[i] == cs_class) ++n_cs;
    }
    REQUIRE(n_cs == 3);  // one per time point
  }
  SECTION("a single time point leaves every edge its own class") {
    const auto cs = VineStructure::path(4);
    const auto cls = edge_classes(cs);
    std::size_t edges = 0;
    for (int k = 1; k <= cs.num_trees(); ++k) edges += cs.tree(k).size();
    REQUIRE(cls.classes.size() == edges);
  }
}

TEST_CASE("class counts match the formula for random cross-sections",
          "[vine]") {
  stats::Rng rng(314, 0);
  for (int d : {2, 3, 4}) {
    const auto cs = random_rvine(d, rng);
    const auto perms = enumerate_compatible(cs);
    SVineSpec spec;
    spec.cross_section = cs;
    spec.in_perm = perms.front();
    spec.out_perm = perms.back();
    spec.markov_order = 1;
    for (int T : {2, 3, 4}) {
      const auto vine = build_svine(spec, T);
      REQUIRE(edge_classes(vine).classes.size() ==
              count_distinct_copulas(T, d, CopulaCountMode::stationary));
      REQUIRE(is_stationary_vine(vine).stationary);
    }
  }
}

TEST_CASE("structure and spec json round trips", "[vine]") {
  const auto spec = mvine_spec(3, 2);
  const auto spec2 = SVineSpec::from_json_string(spec.to_json_string());
  REQUIRE(spec2.in_perm == spec.in_perm);
  REQUIRE(spec2.out_perm == spec.out_perm);
  REQUIRE(spec2.markov_order == 2);
  REQUIRE(spec2.cross_section.tree(1).size() == 2);

  const auto vine = build_svine(spec, 3);
  const auto vine2 = VineStructure::from_json_string(vine.to_json_string());
  REQUIRE(vine2.num_trees() == vine.num_trees());
  for (int k = 1; k <= vine.num_trees(); ++k) {
    REQUIRE(vine2.tree(k).size() == vine.tree(k).size());
    for (std::size_t i = 0; i < vine.tree(k).size(); ++i) {
      REQUIRE(vine2.tree(k)[i].label() == vine.tree(k)[i].label());
    }
  }
}

TEST_CASE("random grid vines are almost never stationary", "[vine]") {
  // random R-vines on the (t, j) grid, relabeled from random_rvine output
  stats::Rng rng(424242, 0);
  const int T = 3, d = 2;
  int non_stationary = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto flat = random_rvine(T * d, rng);
    std::vector<VertexId> grid;
    for (int t = 1; t <= T; ++t) {
      for (int j = 1; j <= d; ++j) grid.push_back({t, j});
    }
    // rebuild with grid vertex labels, preserving the link pattern
    std::vector<std::vector<std::pair<int, int>>> links(flat.num_trees());
    for (int k = 1; k <= flat.num_trees(); ++k) {
      for (const auto& e : flat.tree(k)) links[k - 1].push_back({e.v1, e.v2});
    }
    const VineStructure vine(grid, links);
    const auto rep_out = is_stationary_vine(vine);
    if (!rep_out.stationary) {
      ++non_stationary;
      REQUIRE(rep_out.witness_t >= 1);
      REQUIRE(rep_out.witness_m >= 0);
    }
  }
  REQUIRE(non_stationary == 20);
}
