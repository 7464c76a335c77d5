#pragma once

#include <map>
#include <string>
#include <vector>

#include "svine/bicop.hpp"
#include "svine/vine.hpp"

namespace svine {

/// The vine on one Markov window of p+1 time points, flattened for fast
/// h-function propagation. Edges carry links to their children, their
/// translation class, and the edge one time step ahead (for rolling).
class WindowVine {
 public:
  WindowVine(const SVineSpec& spec, int window_len);

  int window_len() const { return W_; }
  int dim() const { return d_; }
  int num_vars() const { return W_ * d_; }
  /// Flat id of window vertex (w, j), w in 1..W, j in 1..d.
  int var_index(int w, int j) const { return (w - 1) * d_ + (j - 1); }

  struct Edge {
    int level = 1;
    int v1 = -1, v2 = -1;     // level-1: var flat ids; otherwise global edge ids
    int a_var = -1, b_var = -1;
    int a_child = -1, b_child = -1;  // global edge ids (level >= 2)
    bool a_from_child_a = false;     // a equals child's own conditioned a?
    bool b_from_child_a = false;
    int cls = -1;           // translation class index
    int min_time = 1;       // earliest window time in the complete union
    int shifted_id = -1;    // edge with the same label shifted by +1 step
  };

  const std::vector<Edge>& edges() const { return edges_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int levels() const { return static_cast<int>(level_begin_.size()) - 1; }
  /// Global edge-id range [begin, end) of tree level k (1-based).
  std::pair<int, int> level_range(int k) const {
    return {level_begin_[k - 1], level_begin_[k]};
  }

  const std::vector<EdgeClass>& classes() const { return classes_.classes; }
  const VineStructure& vine() const { return vine_; }

  /// Variable order used by the inverse-Rosenblatt sampler: time 1 in in-perm
  /// order, later time points in out-perm order.
  const std::vector<int>& sampling_order() const { return order_; }
  /// Chain of edges (level ascending) inverted when drawing order_[pos].
  const std::vector<int>& chain(int pos) const { return chains_[pos]; }

  /// Attach one copula per class key; keys must cover every class.
  void bind(const std::map<std::string, BivariateCopula>& copulas);
  void bind_class(int cls, const BivariateCopula* cop);
  const BivariateCopula* class_copula(int cls) const { return bound_[cls]; }
  const BivariateCopula* edge_copula(int edge_id) const {
    return bound_[edges_[edge_id].cls];
  }

 private:
  int W_ = 1, d_ = 1;
  VineStructure vine_;
  EdgeClassing classes_;
  std::vector<Edge> edges_;
  std::vector<int> level_begin_;
  std::vector<int> order_;
  std::vector<std::vector<int>> chains_;
  std::vector<const BivariateCopula*> bound_;
};

/// Mutable evaluation state over a WindowVine: variable values plus lazily
/// computed conditional distribution values C(a|D), C(b|D) per edge.
class WindowState {
 public:
  explicit WindowState(const WindowVine& wv);

  void reset();
  void set_var(int flat_id, double u);
  double var(int flat_id) const { return u_[flat_id]; }
  bool has_var(int flat_id) const { return has_u_[flat_id] != 0; }

  double val_a(int edge_id);  // C(a_e | D_e)
  double val_b(int edge_id);  // C(b_e | D_e)

  /// Draw the variable at sampling-order position pos from uniform w;
  /// stores and returns its value on the copula scale.
  double sample_var(int pos, double w);

  /// Roll the window one step: time w+1 becomes time w; the last time point
  /// becomes unset and ready for sampling.
  void shift();

  /// Sum of log pair-copula densities over all edges (all variables set).
  double loglik();

  long clamp_count() const { return clamp_count_; }

 private:
  const WindowVine* wv_;
  std::vector<double> u_;
  std::vector<char> has_u_;
  std::vector<double> va_, vb_;
  std::vector<char> ha_, hb_;
  long clamp_count_ = 0;
};

}  // namespace svine
