#include "cmrf/graphcut.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace cmrf {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = 1e-11;
}  // namespace

CutGraph::CutGraph(int mrf_nodes, int labels)
    : mrf_nodes_(mrf_nodes), labels_(labels) {
  n_ = 2 + mrf_nodes * std::max(0, labels - 1);
  head_.assign(n_, -1);
}

int CutGraph::node_id(int s, int i) const {
  if (i <= 0) return 0;
  if (i >= labels_) return 1;
  return 2 + s * (labels_ - 1) + (i - 1);
}

void CutGraph::add_arc(int u, int v, double cap) {
  if (cap <= 0.0 && !std::isinf(cap)) {
    if (cap < -1e-9) throw std::logic_error("cut graph: negative capacity");
    return;
  }
  if (u == v) return;
  if (v == 0 || u == 1) return;  // into source / out of sink: never cut
  if (u == 0 && v == 1) {        // source->sink: always cut
    if (std::isinf(cap)) throw std::invalid_argument("cut graph: infeasible hard constraint");
    constant_offset += cap;
    return;
  }
  auto push = [&](int a, int b, double cp) {
    to_.push_back(b);
    cap_.push_back(cp);
    next_.push_back(head_[a]);
    head_[a] = static_cast<int>(to_.size()) - 1;
  };
  push(u, v, cap);
  push(v, u, 0.0);  // residual
}

void CutGraph::add_arc(int s_a, int i_a, int s_b, int i_b, double cap) {
  add_arc(node_id(s_a, i_a), node_id(s_b, i_b), cap);
}

void CutGraph::seal() {
  double finite_sum = 0.0;
  for (double cp : cap_) {
    if (!std::isinf(cp)) finite_sum += cp;
  }
  big_m = 1.0 + finite_sum;
  for (double& cp : cap_) {
    if (std::isinf(cp)) cp = big_m;
  }
  sealed_ = true;
}

bool CutGraph::bfs_levels() {
  level_.assign(n_, -1);
  std::queue<int> q;
  level_[0] = 0;
  q.push(0);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int a = head_[u]; a >= 0; a = next_[a]) {
      if (cap_[a] > kEps && level_[to_[a]] < 0) {
        level_[to_[a]] = level_[u] + 1;
        if (to_[a] == 1) return true;
        q.push(to_[a]);
      }
    }
  }
  return level_[1] >= 0;
}

double CutGraph::dfs_push(int u, double limit) {
  if (u == 1) return limit;
  for (int& a = iter_[u]; a >= 0; a = next_[a]) {
    int v = to_[a];
    if (cap_[a] > kEps && level_[v] == level_[u] + 1) {
      double d = dfs_push(v, std::min(limit, cap_[a]));
      if (d > 0.0) {
        cap_[a] -= d;
        cap_[a ^ 1] += d;
        return d;
      }
    }
  }
  level_[u] = -1;
  return 0.0;
}

double CutGraph::max_flow() {
  if (!sealed_) seal();
  double flow = 0.0;
  while (bfs_levels()) {
    iter_ = head_;
    double d;
    while ((d = dfs_push(0, kInf)) > 0.0) flow += d;
  }
  compute_side();
  solved_ = true;
  return flow;
}

void CutGraph::compute_side() {
  side_.assign(n_, 0);
  std::queue<int> q;
  side_[0] = 1;
  q.push(0);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int a = head_[u]; a >= 0; a = next_[a]) {
      if (cap_[a] > kEps && !side_[to_[a]]) {
        side_[to_[a]] = 1;
        q.push(to_[a]);
      }
    }
  }
  if (side_[1]) throw std::logic_error("cut graph: sink reachable after max flow");
}

CutGraph build_cut_graph(const MrfInstance& inst) {
  inst.validate();
  if (!inst.all_convex_hinge()) {
    throw std::invalid_argument("build_cut_graph: convex-hinge potentials required");
  }
  const int L = inst.labels;
  const int N = inst.node_count();
  CutGraph g(N, L);

  // unaries with the absorbed affine parts, shifted to nonnegative
  std::vector<double> theta = inst.unary;
  for (int e = 0; e < inst.edge_count(); ++e) {
    const auto& edge = inst.topology.edges[e];
    const auto& pot = std::get<ConvexHingePotential>(inst.potential_of(e));
    const double w = inst.edge_weight[e];
    g.constant_offset += w * pot.beta;
    for (int i = 0; i < L; ++i) {
      theta[static_cast<size_t>(edge.s) * L + i] -= w * pot.alpha * i;
      theta[static_cast<size_t>(edge.t) * L + i] += w * pot.alpha * i;
    }
  }
  for (int s = 0; s < N; ++s) {
    double* th = theta.data() + static_cast<size_t>(s) * L;
    double shift = *std::min_element(th, th + L);
    g.constant_offset += shift;
    for (int i = 0; i < L; ++i) {
      double cap = th[i] - shift;
      if (cap < 0.0) throw std::logic_error("build_cut_graph: negative unary capacity");
      g.add_arc(g.node_id(s, i), g.node_id(s, i + 1), cap);
    }
    for (int i = 1; i + 1 <= L - 1; ++i) {
      g.add_arc(g.node_id(s, i + 1), g.node_id(s, i), kInf);
    }
  }
  for (int e = 0; e < inst.edge_count(); ++e) {
    const auto& edge = inst.topology.edges[e];
    const auto& pot = std::get<ConvexHingePotential>(inst.potential_of(e));
    const double w = inst.edge_weight[e];
    for (const auto& hterm : pot.hinges) {
      const int d = -hterm.delta;
      for (int i = 1; i <= L - 1 - d; ++i) {
        g.add_arc(edge.t, i + d, edge.s, i, w * hterm.gamma);
      }
    }
    if (pot.bounded_above()) {
      const int d = pot.h_hi;
      for (int i = 1; i <= L - 1 - d; ++i) g.add_arc(edge.t, i + d, edge.s, i, kInf);
    }
    if (pot.bounded_below()) {
      const int d = pot.h_lo;
      for (int i = std::max(1 - d, 1 - L); i <= L - 1; ++i) {
        g.add_arc(edge.s, i, edge.t, i + d, kInf);
      }
    }
  }
  g.seal();
  return g;
}

LabelAssignment extract_labeling(const MrfInstance& inst, const CutGraph& g) {
  if (!g.solved()) throw std::invalid_argument("extract_labeling: run max_flow first");
  const int L = inst.labels;
  LabelAssignment a(inst.node_count());
  const auto& side = g.source_side();
  for (int s = 0; s < inst.node_count(); ++s) {
    int crossings = 0;
    int label = -1;
    auto on_source = [&](int i) {
      int id = g.node_id(s, i);
      return id == 0 ? true : (id == 1 ? false : side[id] != 0);
    };
    bool prev = true;  // a(s,0) = source
    for (int i = 1; i <= L; ++i) {
      bool cur = on_source(i);
      if (prev && !cur) {
        ++crossings;
        label = i - 1;
      }
      if (!prev && cur) {
        throw std::logic_error("extract_labeling: non-monotone cut (big-M too small)");
      }
      prev = cur;
    }
    if (crossings != 1 || label < 0) {
      throw std::logic_error("extract_labeling: cut misses a column");
    }
    a[s] = label;
  }
  return a;
}

std::pair<LabelAssignment, double> graphcut_solve(const MrfInstance& inst) {
  CutGraph g = build_cut_graph(inst);
  g.max_flow();
  LabelAssignment a = extract_labeling(inst, g);
  return {a, energy_of_labeling(inst, a)};
}

}  // namespace cmrf
