#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace svine {

/// A first-tree vertex (t, j): time index t >= 1 and variable index j in 1..d.
/// Cross-sectional-only vines use the constant time 1.
struct VertexId {
  int time = 1;
  int var = 1;
  auto operator<=>(const VertexId&) const = default;
};

std::string to_string(const VertexId& v);

/// An edge of tree level k. Endpoints v1, v2 index the previous level:
/// vertices for k = 1, edges of tree k-1 otherwise. The label (a, b | D) and
/// the complete union are derived from the endpoint unions.
struct VineEdge {
  int level = 1;
  int v1 = -1;
  int v2 = -1;
  VertexId a, b;                        // conditioned pair, (a < b)
  std::vector<VertexId> conditioning;   // sorted
  std::vector<VertexId> complete_union; // sorted

  int lag_span() const;
  /// "a,b|c;d" with the conditioned pair sorted and D sorted.
  std::string label() const;
};

/// Canonical label after shifting the minimum time index to 1.
std::string edge_class_key(const VineEdge& e);

/// A restriction of a vine to a time window; the per-level graphs may be
/// disconnected, so this is not necessarily a vine.
struct GraphSequence {
  int t_start = 1;
  int t_end = 1;
  std::vector<int> kept_vertices;           // indices into source vertices
  std::vector<std::vector<int>> kept_edges; // per level, indices into source trees
  const class VineStructure* source = nullptr;
};

struct StationarityReport {
  bool stationary = true;
  int witness_t = 0;  // first violating window start
  int witness_m = 0;  // window gap (window covers t .. t+m)
};

class VineStructure {
 public:
  VineStructure() = default;

  /// Build from endpoint links; computes labels, unions and validates the
  /// nested-tree and proximity conditions.
  VineStructure(std::vector<VertexId> vertices,
                const std::vector<std::vector<std::pair<int, int>>>& links);

  /// Build from labeled edges (conditioned pair + conditioning set per edge);
  /// endpoints are resolved from the labels.
  static VineStructure from_labels(
      std::vector<VertexId> vertices,
      const std::vector<std::vector<VineEdge>>& labeled_trees);

  /// Path vine 1 - 2 - ... - d (D-vine) on a single time point.
  static VineStructure path(int d);
  /// Star cross-section rooted at `root`, every higher tree again a star.
  static VineStructure star(int d, int root = 1);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  const std::vector<VertexId>& vertices() const { return vertices_; }
  int num_trees() const { return static_cast<int>(trees_.size()); }
  /// Tree level k (1-based).
  const std::vector<VineEdge>& tree(int k) const { return trees_.at(k - 1); }
  const std::vector<std::vector<VineEdge>>& trees() const { return trees_; }

  int max_time() const;
  int vars_per_time() const;  // requires a complete (time x var) grid

  /// All first-tree vertices reachable through the nested membership chain.
  const std::vector<VertexId>& complete_union_of(int level, int edge_idx) const;

  /// Delete every vertex/edge whose complete union leaves [t, t+m].
  GraphSequence restrict(int t, int m) const;

  std::string to_json_string() const;
  static VineStructure from_json_string(const std::string& json);

 private:
  std::vector<VertexId> vertices_;
  std::vector<std::vector<VineEdge>> trees_;

  void validate_and_label(
      const std::vector<std::vector<std::pair<int, int>>>& links);
};

/// Is the restriction a vine (each level a tree on the surviving items)?
bool is_vine(const GraphSequence& g, std::string* why = nullptr);

/// True iff one time shift maps every edge of g1 bijectively onto g2.
bool is_translation(const GraphSequence& g1, const GraphSequence& g2);

/// Checks the windowed-restriction characterization of stationarity; on
/// failure reports the first violating window (t, m).
StationarityReport is_stationary_vine(const VineStructure& vine);

// --- compatible permutations -------------------------------------------------

/// Definition check: perm (1-based variable ids) against a cross-sectional vine.
bool is_compatible(const VineStructure& cross_section,
                   const std::vector<int>& perm);

/// True if the prefix can be extended to a full compatible permutation.
bool is_prefix_extendable(const VineStructure& cross_section,
                          const std::vector<int>& prefix);

/// All compatible permutations (optionally with fixed first element).
/// Guarded to d <= 10; larger dimensions should use is_compatible directly.
std::vector<std::vector<int>> enumerate_compatible(
    const VineStructure& cross_section, std::optional<int> first = {});

// --- S-vine specification ------------------------------------------------------

struct SVineSpec {
  VineStructure cross_section;
  std::vector<int> in_perm;   // i_1, ..., i_d
  std::vector<int> out_perm;  // j_1, ..., j_d
  int markov_order = 1;

  int dim() const { return cross_section.num_vertices(); }
  void validate() const;

  std::string to_json_string() const;
  static SVineSpec from_json_string(const std::string& json);
};

/// The unique stationary vine on T time points with the given cross-sectional
/// structure and in/out permutations. Trees up to level d follow the explicit
/// edge formula; higher trees are the proximity-consistent continuation,
/// adding translation classes with the smallest time gap first.
VineStructure build_svine(const SVineSpec& spec, int T);

// --- translation classes ---------------------------------------------------------

struct EdgeClass {
  std::string key;
  int level = 1;
  int lag_span = 0;
  VineEdge representative;  // shifted so the minimum time index is 1
};

struct EdgeClassing {
  std::vector<EdgeClass> classes;
  std::vector<std::vector<int>> edge_class;  // per level, per edge: class index
};

/// Partition of all edges into translation-equivalence classes.
EdgeClassing edge_classes(const VineStructure& vine);

/// Keys of the classes with lag span > p; assigning independence to them
/// yields a Markov(p) model.
std::vector<std::string> markov_truncate(const VineStructure& vine, int p);

enum class CopulaCountMode { general, stationary, markov };

/// Number of distinct pair-copulas: general T*d-dimensional model,
/// stationary model, or stationary Markov(p) model.
std::uint64_t count_distinct_copulas(int T, int d, CopulaCountMode mode,
                                     int p = 0);

}  // namespace svine
