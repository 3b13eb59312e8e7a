#pragma once

#include <utility>
#include <vector>

#include "cmrf/model.hpp"

namespace cmrf {

// Layered min-cut construction for convex hinge priors: a chain of L unary
// arcs per node (columns), reverse big-M arcs enforcing a monotone cut,
// hinge terms as inter-column arcs, hard domain bounds as big-M arcs. The
// boundary layers a(s,0) and a(s,L) are contracted into source and sink.
class CutGraph {
 public:
  CutGraph(int mrf_nodes, int labels);

  int node_id(int s, int i) const;  // 0 = source, 1 = sink
  void add_arc(int u, int v, double cap);        // cap may be +inf (big-M)
  void add_arc(int s_a, int i_a, int s_b, int i_b, double cap);

  // replaces +inf capacities by 1 + sum of finite ones
  void seal();

  double max_flow();
  const std::vector<char>& source_side() const { return side_; }
  bool solved() const { return solved_; }

  double constant_offset = 0.0;
  double big_m = 0.0;

  int arc_count() const { return static_cast<int>(to_.size()); }
  int node_count() const { return n_; }

 private:
  bool bfs_levels();
  double dfs_push(int u, double limit);
  void compute_side();

  int n_ = 0;
  int mrf_nodes_ = 0;
  int labels_ = 0;
  std::vector<int> head_;   // adjacency: first arc per node
  std::vector<int> next_;   // next arc in list
  std::vector<int> to_;
  std::vector<double> cap_;
  std::vector<int> level_;
  std::vector<int> iter_;
  std::vector<char> side_;
  bool sealed_ = false;
  bool solved_ = false;
};

CutGraph build_cut_graph(const MrfInstance& inst);

LabelAssignment extract_labeling(const MrfInstance& inst, const CutGraph& g);

// build + max_flow + extract; returns the labeling and its energy
std::pair<LabelAssignment, double> graphcut_solve(const MrfInstance& inst);

}  // namespace cmrf
