#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "cmrf/oracle.hpp"
#include "cmrf/relaxations.hpp"
#include "cmrf/rng.hpp"

using namespace cmrf;

TEST_CASE("brute force: chain example and cap") {
  MrfInstance inst;
  inst.topology.node_count = 2;
  inst.topology.edges = {{0, 1, EdgeOrientation::None}};
  inst.labels = 3;
  inst.unary = {0, 1, 2, 2, 1, 0};
  inst.potentials.push_back(truncated_linear(3, 1.0));
  inst.edge_potential = {0};
  inst.edge_weight = {1.0};
  auto [lab, e] = oracle::brute_force_map(inst);
  CHECK(lab == LabelAssignment{0, 2});
  CHECK(e == 1.0);

  auto big = gen_random_instance(10, 10, 20, 1);
  CHECK_THROWS_AS(oracle::brute_force_map(big), std::invalid_argument);
}

TEST_CASE("brute force: minimality spot check") {
  auto inst = gen_random_instance(2, 2, 4, 3);
  auto [lab, opt] = oracle::brute_force_map(inst);
  SplitMix64 rng(4);
  for (int rep = 0; rep < 1000; ++rep) {
    LabelAssignment a(inst.node_count());
    for (auto& l : a) l = static_cast<int>(rng.next_below(inst.labels));
    CHECK(opt <= energy_of_labeling(inst, a));
  }
}

TEST_CASE("naive_apply: identity row program") {
  StructuredProgram prog;
  Structure st;
  prog.structures.push_back(st);
  int b = prog.add_block(BlockKind::Box, 3, 0.0, 1.0, 0);
  for (int j = 0; j < 3; ++j) {
    prog.begin_row(ProxKind::Free, 0.0, 0.0, 0);
    prog.atom_var(prog.blocks[b].offset + j, 1.0);
    prog.end_row();
  }
  prog.finalize();
  std::vector<double> v = {0.3, -1.2, 0.5};
  CHECK(oracle::naive_apply(prog, v, false) == v);
  CHECK(oracle::naive_apply(prog, v, true) == v);
}

TEST_CASE("equivalence harness: compact matches the full relaxation") {
  SolverConfig cfg;
  cfg.max_iters = 300000;
  cfg.check_every = 500;
  cfg.tol_gap = 1e-6;
  auto rep = oracle::equivalence_harness(5, 3, 3, 6, 3, cfg, 1);
  CHECK(rep.records.size() == 5);
  CHECK(rep.max_rel_diff < 1e-4);
  CHECK(rep.nonconverged == 0);
  auto csv = rep.to_csv();
  CHECK(csv.rfind("seed,opt_full,opt_compact,rel_diff,converged\n", 0) == 0);
}

TEST_CASE("equivalence: K=1 bounded piece reduces to the convex program") {
  // single full-domain affine piece: compact and convex LP share the optimum
  SplitMix64 rng(8);
  for (std::uint64_t seed = 1; seed <= 2; ++seed) {
    MrfInstance inst;
    inst.topology = make_grid(2, 2);
    inst.labels = 4;
    inst.unary.resize(16);
    for (auto& u : inst.unary) u = rng.uniform(0, 2);
    inst.potentials.emplace_back(PiecewiseLinearPotential({{0.5, 0.25, -3, 3}}));
    inst.edge_potential.assign(4, 0);
    inst.edge_weight.assign(4, 1.0);
    auto compact = build_compact(inst, CompactStyle::General);

    auto hinst = inst;
    ConvexHingePotential affine;
    affine.alpha = 0.5;
    affine.beta = 0.25;
    hinst.potentials[0] = affine;
    auto convex = build_convex_lp(hinst);

    SolverConfig cfg;
    cfg.max_iters = 200000;
    cfg.check_every = 500;
    cfg.tol_gap = 1e-7;
    auto rc = solve(compact, inst, cfg);
    auto rv = solve(convex, hinst, cfg);
    CHECK(std::abs(rc.best_dual_bound - rv.best_dual_bound) <=
          1e-5 * (1.0 + std::abs(rv.best_dual_bound)));
  }
}

TEST_CASE("equivalence: tree instances are tight") {
  // LP relaxations are exact on trees, so both optima equal the MAP energy
  SolverConfig cfg;
  cfg.max_iters = 300000;
  cfg.check_every = 500;
  cfg.tol_gap = 1e-7;
  for (std::uint64_t seed = 2; seed <= 4; ++seed) {
    auto inst = oracle::gen_harness_instance(5, 1, 4, 3, seed);
    auto [lab, opt] = oracle::brute_force_map(inst);
    auto full = build_full_lp(inst);
    auto compact = build_compact(inst, CompactStyle::General);
    auto rf = solve(full, inst, cfg);
    auto rc = solve(compact, inst, cfg);
    CHECK(std::abs(rf.best_dual_bound - opt) <= 1e-4 * (1.0 + std::abs(opt)));
    CHECK(std::abs(rc.best_dual_bound - opt) <= 1e-4 * (1.0 + std::abs(opt)));
    CHECK(rf.best_energy == doctest::Approx(opt).epsilon(1e-9));
    CHECK(rc.best_energy == doctest::Approx(opt).epsilon(1e-9));
  }
}
