#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "cmrf/graphcut.hpp"
#include "cmrf/oracle.hpp"
#include "cmrf/pdsolver.hpp"
#include "cmrf/relaxations.hpp"
#include "cmrf/rng.hpp"

using namespace cmrf;

namespace {

ConvexHingePotential random_convex(SplitMix64& rng, int labels) {
  // max of a few integer-breakpoint affines, sometimes with hard bounds
  const int r = labels - 1;
  std::vector<std::pair<double, double>> affines;
  int n = 1 + static_cast<int>(rng.next_below(3));
  double slope = -1.0 - static_cast<double>(rng.next_below(3));
  double val = rng.uniform(0, 1);
  int x0 = -r;
  // build as a convex chain of slopes increasing at integer breakpoints
  std::vector<std::pair<double, double>> pts;
  for (int k = 0; k < n; ++k) {
    affines.emplace_back(slope, val - slope * x0);
    int bp = x0 + 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(2 * r)));
    val += slope * (bp - x0);
    x0 = bp;
    slope += 0.5 + static_cast<double>(rng.next_below(3));
  }
  auto pot = max_affine_to_hinge(affines);
  if (rng.next_below(3) == 0) {
    pot.h_lo = -r + static_cast<int>(rng.next_below(2));
    pot.h_hi = r - static_cast<int>(rng.next_below(2));
  }
  return pot;
}

MrfInstance random_convex_instance(int width, int height, int labels, std::uint64_t seed) {
  SplitMix64 rng(seed);
  MrfInstance inst;
  inst.topology = make_grid(width, height);
  inst.labels = labels;
  inst.unary.resize(static_cast<size_t>(inst.node_count()) * labels);
  for (auto& u : inst.unary) u = rng.uniform(0, 2);
  inst.potentials.push_back(random_convex(rng, labels));
  inst.edge_potential.assign(inst.edge_count(), 0);
  inst.edge_weight.resize(inst.edge_count());
  for (auto& w : inst.edge_weight) w = rng.uniform(0.1, 1.0);
  return inst;
}

}  // namespace

TEST_CASE("max_flow: single arc and diamond") {
  CutGraph g(0, 1);
  g.add_arc(0, 1, 3.0);  // source -> sink folds into the constant
  g.seal();
  CHECK(g.max_flow() == 0.0);
  CHECK(g.constant_offset == 3.0);

  // diamond: s -> a (2), s -> b (1), a -> t (2), b -> t (3), min cut = 3
  CutGraph d(2, 2);  // two internal columns of one node each
  int a = d.node_id(0, 1), b = d.node_id(1, 1);
  d.add_arc(0, a, 2.0);
  d.add_arc(0, b, 1.0);
  d.add_arc(a, 1, 2.0);
  d.add_arc(b, 1, 3.0);
  d.seal();
  CHECK(d.max_flow() == doctest::Approx(3.0));
}

TEST_CASE("graphcut: single node reduces to the unary argmin") {
  MrfInstance inst;
  inst.topology.node_count = 1;
  inst.labels = 4;
  inst.unary = {3, 1, 2, 5};
  auto [lab, e] = graphcut_solve(inst);
  CHECK(lab == LabelAssignment{1});
  CHECK(e == 1.0);
}

TEST_CASE("graphcut: L=2 single edge lateral arc") {
  ConvexHingePotential pot;
  pot.hinges = {{1.0, 0}};  // [h]_+
  MrfInstance inst;
  inst.topology.node_count = 2;
  inst.topology.edges = {{0, 1, EdgeOrientation::None}};
  inst.labels = 2;
  inst.unary = {0, 1, 1, 0};
  inst.potentials.push_back(pot);
  inst.edge_potential = {0};
  inst.edge_weight = {1.0};
  auto [lab, e] = graphcut_solve(inst);
  auto [blab, be] = oracle::brute_force_map(inst);
  CHECK(e == be);
}

TEST_CASE("graphcut: two-node chain with |h| prior matches brute force") {
  ConvexHingePotential abs1;
  abs1.alpha = -1.0;
  abs1.hinges = {{2.0, 0}};
  MrfInstance inst;
  inst.topology.node_count = 2;
  inst.topology.edges = {{0, 1, EdgeOrientation::None}};
  inst.labels = 3;
  inst.unary = {0, 1, 2, 2, 1, 0};
  inst.potentials.push_back(abs1);
  inst.edge_potential = {0};
  inst.edge_weight = {1.0};
  auto [lab, e] = graphcut_solve(inst);
  auto [blab, be] = oracle::brute_force_map(inst);
  CHECK(e == be);
  CHECK(lab == blab);
}

TEST_CASE("graphcut: random convex instances match brute force exactly") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    auto inst = random_convex_instance(3, 2, 4, seed);
    auto [lab, e] = graphcut_solve(inst);
    auto [blab, be] = oracle::brute_force_map(inst);
    CHECK(e == be);
    // flow value + offset reproduces the labeling energy
    CutGraph g = build_cut_graph(inst);
    double flow = g.max_flow();
    CHECK(std::abs(flow + g.constant_offset - e) <= 1e-6 * (1.0 + std::abs(e)));
  }
}

TEST_CASE("graphcut: Lipschitz prior is exact") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SplitMix64 rng(seed);
    MrfInstance inst;
    inst.topology = make_grid(4, 1);
    inst.labels = 6;
    inst.unary.resize(24);
    for (auto& u : inst.unary) u = rng.uniform(0, 2);
    inst.potentials.push_back(lipschitz_hinge(2));
    inst.edge_potential.assign(3, 0);
    inst.edge_weight.assign(3, 1.0);
    auto [lab, e] = graphcut_solve(inst);
    auto [blab, be] = oracle::brute_force_map(inst);
    CHECK(e == be);
    for (int k = 0; k + 1 < 4; ++k) CHECK(std::abs(lab[k + 1] - lab[k]) <= 2);
  }
}

TEST_CASE("graphcut: 8x8 grid agrees with the convex LP optimum") {
  auto inst = random_convex_instance(8, 8, 8, 99);
  auto [lab, e] = graphcut_solve(inst);
  auto prog = build_convex_lp(inst);
  SolverConfig cfg;
  cfg.max_iters = 60000;
  cfg.check_every = 500;
  cfg.tol_gap = 1e-7;
  auto res = solve(prog, inst, cfg);
  CHECK(std::abs(res.best_dual_bound - e) <= 1e-4 * (1.0 + std::abs(e)));
  CHECK(res.best_energy == doctest::Approx(e).epsilon(1e-6));
}

TEST_CASE("graphcut: rejects non-convex potentials") {
  auto inst = gen_random_instance(2, 2, 3, 1);
  CHECK_THROWS_AS(build_cut_graph(inst), std::invalid_argument);
}
