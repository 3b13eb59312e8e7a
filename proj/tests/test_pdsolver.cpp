#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "cmrf/oracle.hpp"
#include "cmrf/pdsolver.hpp"
#include "cmrf/relaxations.hpp"
#include "cmrf/rng.hpp"

using namespace cmrf;

namespace {

MrfInstance convex_chain() {
  MrfInstance inst;
  inst.topology.node_count = 2;
  inst.topology.edges = {{0, 1, EdgeOrientation::None}};
  inst.labels = 4;
  inst.unary = {0.0, 0.7, 1.4, 2.1, 1.8, 1.2, 0.6, 0.0};
  ConvexHingePotential abs1;
  abs1.alpha = -1.0;
  abs1.hinges = {{2.0, 0}};
  inst.potentials.push_back(abs1);
  inst.edge_potential = {0};
  inst.edge_weight = {0.5};
  return inst;
}

}  // namespace

TEST_CASE("preconditioners: hand-counted step sizes") {
  StructuredProgram prog;
  Structure st;
  st.kind = StructureKind::GenericEdge;
  prog.structures.push_back(st);
  int b = prog.add_block(BlockKind::Box, 2, 0.0, 1.0, 0);
  prog.begin_row(ProxKind::Free, 0.0, 0.0, 0);
  prog.atom_var(prog.blocks[b].offset + 0, 1.0);
  prog.atom_var(prog.blocks[b].offset + 1, 1.0);
  prog.end_row();
  prog.structures[0].row_end = 1;
  prog.structures[0].block_end = 1;
  prog.finalize();
  auto pc = compute_preconditioners(prog);
  CHECK(pc.sigma[0] == 0.5);
  CHECK(pc.tau[0] == 1.0);
  CHECK(pc.tau[1] == 1.0);
  CHECK_FALSE(pc.floored);
}

TEST_CASE("preconditioners: prefix atom spreads over the covered columns") {
  StructuredProgram prog;
  Structure st;
  prog.structures.push_back(st);
  int b = prog.add_block(BlockKind::Box, 5, 0.0, 1.0, 0);
  prog.begin_row(ProxKind::Interval, 0.0, 1.0, 0);
  prog.atom_prefix(b, 3, 2.0);  // gamma = 2 over y_0..y_2
  prog.end_row();
  prog.finalize();
  auto pc = compute_preconditioners(prog);
  CHECK(pc.sigma[0] == doctest::Approx(1.0 / 6.0));
  for (int j = 0; j < 3; ++j) CHECK(pc.tau[j] == 0.5);
  // columns never touched are floored and flagged
  CHECK(pc.tau[3] == 1e12);
  CHECK(pc.floored);
}

TEST_CASE("prox maps") {
  auto a = prox_simplex(std::vector<double>{0.3, 0.7});
  CHECK(a[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(a[1] == doctest::Approx(0.7).epsilon(1e-12));
  auto b = prox_simplex(std::vector<double>{2.0, 0.0});
  CHECK(b[0] == doctest::Approx(1.0));
  CHECK(b[1] == doctest::Approx(0.0));
  double v[2] = {3.0, 4.0};
  prox_l2ball(v, 2, 1.0);
  CHECK(v[0] == doctest::Approx(0.6));
  CHECK(v[1] == doctest::Approx(0.8));
  CHECK(prox_interval(2.0, 0.0, 1.5) == 1.5);
  CHECK(prox_interval(-2.0, 0.0, 1.5) == 0.0);
  CHECK(prox_interval(0.7, 0.0, 1.5) == 0.7);
}

TEST_CASE("prox_simplex: projection optimality by active-set enumeration") {
  SplitMix64 rng(21);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 2 + static_cast<int>(rng.next_below(3));
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-2, 2);
    auto p = prox_simplex(v);
    double sum = 0.0;
    for (double x : p) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    // brute force over active sets
    double best = kInfEnergy;
    for (int mask = 1; mask < (1 << n); ++mask) {
      int cnt = 0;
      double s = 0.0;
      for (int j = 0; j < n; ++j) {
        if (mask & (1 << j)) {
          ++cnt;
          s += v[j];
        }
      }
      double theta = (s - 1.0) / cnt;
      std::vector<double> cand(n, 0.0);
      bool valid = true;
      double d = 0.0;
      for (int j = 0; j < n; ++j) {
        if (mask & (1 << j)) {
          cand[j] = v[j] - theta;
          if (cand[j] < -1e-12) valid = false;
        }
        d += (cand[j] - v[j]) * (cand[j] - v[j]);
      }
      if (valid) best = std::min(best, d);
    }
    double dist = 0.0;
    for (int j = 0; j < n; ++j) dist += (p[j] - v[j]) * (p[j] - v[j]);
    CHECK(dist <= best + 1e-9);
  }
}

TEST_CASE("forward example: one-hot against a prefix row") {
  StructuredProgram prog;
  Structure st;
  prog.structures.push_back(st);
  int b = prog.add_block(BlockKind::Simplex, 4, 0.0, 1.0, 0);
  prog.begin_row(ProxKind::Free, 0.0, 0.0, 0);
  prog.atom_prefix(b, 2, 1.0);  // Y^2
  prog.end_row();
  prog.finalize();
  for (int hot = 0; hot < 4; ++hot) {
    std::vector<double> x(4, 0.0);
    x[hot] = 1.0;
    std::vector<double> out;
    apply_forward(prog, x, out);
    CHECK(out[0] == (hot < 2 ? 1.0 : 0.0));
  }
  // adjoint of a unit dual scatters over the covered prefix
  std::vector<double> adj;
  apply_adjoint(prog, {1.0}, adj);
  CHECK(adj == std::vector<double>{1.0, 1.0, 0.0, 0.0});
}

TEST_CASE("operators match the dense oracle on random programs") {
  SplitMix64 rng(3);
  int checked = 0;
  for (std::uint64_t seed = 1; checked < 50; ++seed) {
    auto inst = oracle::gen_harness_instance(2 + static_cast<int>(seed % 2), 2,
                                             3 + static_cast<int>(seed % 4), 3, seed);
    StructuredProgram prog;
    switch (seed % 3) {
      case 0:
        prog = build_full_lp(inst);
        break;
      case 1:
        prog = build_compact(inst, CompactStyle::General);
        break;
      default:
        prog = build_compact(gen_random_instance(2, 2, 4, seed));
        break;
    }
    std::vector<double> x(prog.primal_dim), p(prog.rows.size());
    for (auto& v : x) v = rng.uniform(-1, 1);
    for (auto& v : p) v = rng.uniform(-1, 1);
    std::vector<double> kx, ktp;
    apply_forward(prog, x, kx);
    apply_adjoint(prog, p, ktp);
    auto kx_ref = oracle::naive_apply(prog, x, false);
    auto ktp_ref = oracle::naive_apply(prog, p, true);
    double max_diff = 0.0;
    for (size_t r = 0; r < kx.size(); ++r) max_diff = std::max(max_diff, std::abs(kx[r] - kx_ref[r]));
    for (int j = 0; j < prog.primal_dim; ++j) {
      max_diff = std::max(max_diff, std::abs(ktp[j] - ktp_ref[j]));
    }
    CHECK(max_diff < 1e-12);
    // adjoint pairing <Kx, p> = <x, K^T p>
    double lhs = 0.0, rhs = 0.0;
    for (size_t r = 0; r < kx.size(); ++r) lhs += kx[r] * p[r];
    for (int j = 0; j < prog.primal_dim; ++j) rhs += x[j] * ktp[j];
    CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(lhs)));
    ++checked;
  }
}

TEST_CASE("solve: unary-only program converges to the argmin") {
  MrfInstance inst;
  inst.topology.node_count = 3;
  inst.labels = 4;
  inst.unary = {3, 1, 2, 5, 0.5, 0.4, 0.9, 0.2, 2, 2, 1, 2};
  auto prog = build_full_lp(inst);
  SolverConfig cfg;
  cfg.max_iters = 500;
  cfg.check_every = 10;
  cfg.tol_gap = 1e-6;
  auto res = solve(prog, inst, cfg);
  CHECK(res.reason == TerminationReason::Tolerance);
  CHECK(res.best_labeling == LabelAssignment{1, 3, 2});
  CHECK(res.best_energy == doctest::Approx(1 + 0.2 + 1).epsilon(1e-6));
  CHECK(res.precond_floored);  // unary-only: every column is empty
}

TEST_CASE("solve: two-node chain with a convex prior reaches the MAP") {
  auto inst = convex_chain();
  auto prog = build_convex_lp(inst);
  SolverConfig cfg;
  cfg.max_iters = 20000;
  cfg.check_every = 50;
  cfg.tol_gap = 1e-7;
  auto res = solve(prog, inst, cfg);
  // PWL twin for the brute-force reference
  auto pinst = inst;
  pinst.potentials[0] = l1_potential(4, 1.0, 0.0);
  auto [lab, opt] = oracle::brute_force_map(pinst);
  CHECK(res.best_energy == doctest::Approx(opt).epsilon(1e-4));
  CHECK(res.best_dual_bound <= opt + 1e-6);
  CHECK(res.best_dual_bound == doctest::Approx(opt).epsilon(1e-4));
}

TEST_CASE("solve: dual feasibility and simplex drift after iterations") {
  auto inst = oracle::gen_harness_instance(2, 2, 4, 3, 5);
  auto prog = build_compact(inst, CompactStyle::General);
  SolverConfig cfg;
  cfg.max_iters = 137;  // stop mid-run
  cfg.check_every = 137;
  auto res = solve(prog, inst, cfg);
  for (size_t r = 0; r < prog.rows.size(); ++r) {
    const auto& row = prog.rows[r];
    if (row.prox == ProxKind::Interval) {
      CHECK(res.p[r] >= row.lo);
      CHECK(res.p[r] <= row.hi);
    }
  }
  for (const auto& blk : prog.blocks) {
    if (blk.kind == BlockKind::Simplex) {
      double sum = 0.0;
      for (int j = 0; j < blk.dim; ++j) {
        CHECK(res.x[blk.offset + j] >= 0.0);
        sum += res.x[blk.offset + j];
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    } else {
      for (int j = 0; j < blk.dim; ++j) {
        CHECK(res.x[blk.offset + j] >= blk.lo);
        CHECK(res.x[blk.offset + j] <= blk.hi);
      }
    }
  }
}

TEST_CASE("solve: ball duals stay inside their groups") {
  MrfInstance inst;
  inst.topology = make_grid(2, 2);
  inst.labels = 3;
  SplitMix64 urng(2);
  inst.unary.resize(12);
  for (auto& u : inst.unary) u = urng.uniform(0, 2);
  inst.potentials.push_back(truncated_linear(3, 1.0));
  inst.edge_potential.assign(4, 0);
  inst.edge_weight.assign(4, 1.0);
  auto prog = build_compact_isotropic(inst, IsoVariant::JointTerms);
  SolverConfig cfg;
  cfg.max_iters = 321;
  cfg.check_every = 321;
  auto res = solve(prog, inst, cfg);
  for (const auto& g : prog.balls) {
    double sq = 0.0;
    for (int r = g.row_begin; r < g.row_end; ++r) sq += res.p[r] * res.p[r];
    CHECK(std::sqrt(sq) <= g.radius * (1.0 + 1e-12));
  }
}

TEST_CASE("solve: deterministic traces in single-threaded mode") {
  auto inst = oracle::gen_harness_instance(3, 2, 4, 3, 11);
  auto prog = build_compact(inst, CompactStyle::General);
  SolverConfig cfg;
  cfg.max_iters = 400;
  cfg.check_every = 40;
  auto a = solve(prog, inst, cfg);
  auto b = solve(prog, inst, cfg);
  REQUIRE(a.trace.points.size() == b.trace.points.size());
  for (size_t i = 0; i < a.trace.points.size(); ++i) {
    CHECK(a.trace.points[i].primal_energy == b.trace.points[i].primal_energy);
    CHECK(a.trace.points[i].dual_bound == b.trace.points[i].dual_bound);
    CHECK(a.trace.points[i].gap == b.trace.points[i].gap);
  }
  CHECK(a.x == b.x);
}

#ifdef _OPENMP
TEST_CASE("solve: parallel mode matches the reference energy") {
  auto inst = oracle::gen_harness_instance(4, 3, 5, 3, 13);
  auto prog = build_compact(inst, CompactStyle::General);
  SolverConfig cfg;
  cfg.max_iters = 2000;
  cfg.check_every = 2000;
  auto serial = solve(prog, inst, cfg);
  cfg.threads = 2;
  auto parallel = solve(prog, inst, cfg);
  CHECK(std::abs(serial.best_energy - parallel.best_energy) <= 1e-6);
  CHECK(std::abs(serial.best_dual_bound - parallel.best_dual_bound) <= 1e-5);
}
#endif

TEST_CASE("solve: full-LP kernel path matches the generic operators") {
  auto inst = gen_random_instance(2, 2, 5, 3);
  auto prog = build_full_lp(inst);
  // one iteration by hand with the reference operators
  auto pc = compute_preconditioners(prog);
  std::vector<double> x0(prog.primal_dim, 0.0);
  std::vector<double> kx;
  apply_forward(prog, x0, kx);
  std::vector<double> p1(prog.rows.size());
  for (size_t r = 0; r < p1.size(); ++r) p1[r] = pc.sigma[r] * kx[r];
  std::vector<double> adj;
  apply_adjoint(prog, p1, adj);
  std::vector<double> x1(prog.primal_dim);
  for (int j = 0; j < prog.primal_dim; ++j) {
    x1[j] = x0[j] - pc.tau[j] * (adj[j] + prog.objective_coef(j));
  }
  for (const auto& blk : prog.blocks) {
    if (blk.kind == BlockKind::Simplex) {
      prox_simplex(x1.data() + blk.offset, blk.dim);
    } else {
      for (int j = 0; j < blk.dim; ++j) {
        x1[blk.offset + j] = std::min(std::max(x1[blk.offset + j], blk.lo), blk.hi);
      }
    }
  }
  SolverConfig cfg;
  cfg.max_iters = 1;
  cfg.check_every = 1;
  auto res = solve(prog, inst, cfg);
  for (int j = 0; j < prog.primal_dim; ++j) CHECK(res.x[j] == x1[j]);
}

TEST_CASE("solve: trace CSV format") {
  EnergyTrace t;
  t.points.push_back({10, 1.5, 0.5, 0.666});
  t.points.push_back({20, 1.25, 0.75, 0.28});
  auto csv = t.to_csv();
  CHECK(csv.rfind("iter,primal_energy,dual_bound,gap\n", 0) == 0);
  CHECK(csv.find("10,1.5,0.5,0.666") != std::string::npos);
}

TEST_CASE("solve: config validation") {
  auto inst = convex_chain();
  auto prog = build_convex_lp(inst);
  SolverConfig cfg;
  cfg.max_iters = 0;
  CHECK_THROWS_AS(solve(prog, inst, cfg), std::invalid_argument);
  cfg.max_iters = 10;
  cfg.tol_gap = 0.0;
  CHECK_THROWS_AS(solve(prog, inst, cfg), std::invalid_argument);
}
