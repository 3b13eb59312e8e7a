#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cmrf/potentials.hpp"

namespace cmrf {

enum class EdgeOrientation : std::uint8_t { None, Horizontal, Vertical };

struct GraphEdge {
  int s = 0;
  int t = 0;
  EdgeOrientation orient = EdgeOrientation::None;
};

struct GridInfo {
  int width = 0;
  int height = 0;
};

struct GraphTopology {
  int node_count = 0;
  std::vector<GraphEdge> edges;
  std::optional<GridInfo> grid;
};

// 4-connected forward-difference grid: per pixel in row-major order, the
// edge to the right neighbor, then the edge to the down neighbor.
GraphTopology make_grid(int width, int height);

using PairwisePotential = std::variant<PiecewiseLinearPotential, ConvexHingePotential>;

double evaluate_potential(const PairwisePotential& p, int h);

struct MrfInstance {
  GraphTopology topology;
  int labels = 0;
  std::vector<double> unary;             // node_count x labels, row-major
  std::vector<PairwisePotential> potentials;
  std::vector<int> edge_potential;       // per edge, index into potentials
  std::vector<double> edge_weight;       // per edge

  int node_count() const { return topology.node_count; }
  int edge_count() const { return static_cast<int>(topology.edges.size()); }
  double unary_at(int s, int i) const { return unary[static_cast<size_t>(s) * labels + i]; }
  const PairwisePotential& potential_of(int e) const { return potentials[edge_potential[e]]; }

  bool all_piecewise_linear() const;
  bool all_convex_hinge() const;

  // throws std::invalid_argument on inconsistent dimensions or piece bounds
  void validate() const;
};

using LabelAssignment = std::vector<int>;

double energy_of_labeling(const MrfInstance& inst, const LabelAssignment& a);

// 20x20-style random ensemble: grid topology, unaries U(0,2), truncated
// linear pairwise min{|h|,2} with per-edge weight U(0,1). Deterministic in
// the seed (SplitMix64; unaries drawn node-major then edge weights in edge
// order).
MrfInstance gen_random_instance(int width, int height, int labels, std::uint64_t seed);

// Label from a relaxed simplex vector: largest i whose cumulative prefix
// sum stays strictly below 1/2.
int round_superlevel(const double* x, int labels);
int round_superlevel(const std::vector<double>& x);

MrfInstance read_instance(const std::string& path);
void write_instance(const MrfInstance& inst, const std::string& path);
MrfInstance instance_from_json_text(const std::string& text);
std::string instance_to_json_text(const MrfInstance& inst);

}  // namespace cmrf
