#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "cmrf/mplp.hpp"
#include "cmrf/oracle.hpp"
#include "cmrf/rng.hpp"

using namespace cmrf;

TEST_CASE("min_filter examples") {
  CHECK(min_filter({5, 2, 8, 6}, -1, 1) == std::vector<double>{2, 2, 2, 6});
  CHECK(min_filter({5, 2, 8, 6}, 0, 0) == std::vector<double>{5, 2, 8, 6});
  CHECK(min_filter({3, 1, 4}, -2, 2) == std::vector<double>{1, 1, 1});
  CHECK_THROWS_AS(min_filter({1, 2}, 1, 0), std::invalid_argument);
}

TEST_CASE("min_filter: out-of-range windows") {
  auto out = min_filter({1, 2, 3}, 5, 7);
  for (double v : out) CHECK(std::isinf(v));
  auto partial = min_filter({4, 1, 9}, 1, 5);
  CHECK(partial[0] == 1);
  CHECK(partial[1] == 9);
  CHECK(std::isinf(partial[2]));
}

TEST_CASE("min_filter equals the naive scan on random arrays") {
  SplitMix64 rng(5);
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = 1 + static_cast<int>(rng.next_below(40));
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-10, 10);
    int lo = static_cast<int>(rng.next_below(11)) - 5;
    int hi = lo + static_cast<int>(rng.next_below(8));
    auto fast = min_filter(v, lo, hi);
    for (int i = 0; i < n; ++i) {
      double m = kInfEnergy;
      for (int j = std::max(0, i + lo); j <= std::min(n - 1, i + hi); ++j) {
        m = std::min(m, v[j]);
      }
      if (std::isinf(m)) {
        CHECK(std::isinf(fast[i]));
      } else {
        CHECK(fast[i] == m);
      }
    }
  }
}

TEST_CASE("lower_envelope examples") {
  std::vector<double> theta = {0, 3, 1, 4};
  // zero potential over the full range: constant minimum
  PiecewiseLinearPotential zero({{0, 0, -3, 3}});
  CHECK(lower_envelope(theta, zero, 1.0) == std::vector<double>{0, 0, 0, 0});
  // identity window
  PiecewiseLinearPotential ident({{0, 0, 0, 0}});
  CHECK(lower_envelope(theta, ident, 1.0) == theta);
  // truncated linear min{|h|, 2}
  auto trunc = truncated_linear(4, 2.0);
  CHECK(lower_envelope(theta, trunc, 1.0) == std::vector<double>{0, 1, 1, 2});
}

TEST_CASE("lower_envelope equals naive_envelope exactly") {
  SplitMix64 rng(17);
  for (int rep = 0; rep < 300; ++rep) {
    const int L = 2 + static_cast<int>(rng.next_below(40));
    const int r = L - 1;
    std::vector<double> theta(L);
    for (auto& x : theta) x = rng.uniform(0, 5);
    const int K = 1 + static_cast<int>(rng.next_below(4));
    std::vector<BoundedLinearPiece> pieces;
    for (int k = 0; k < K; ++k) {
      int lo = -r + static_cast<int>(rng.next_below(2 * r + 1));
      int hi = lo + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(r - lo + 1)));
      pieces.push_back({rng.uniform(-2, 2), rng.uniform(0, 2), lo, hi});
    }
    PiecewiseLinearPotential pot(pieces);
    double w = rng.uniform(0, 2);
    auto a = lower_envelope(theta, pot, w);
    auto b = oracle::naive_envelope(theta, pot, w);
    for (int i = 0; i < L; ++i) {
      if (std::isinf(b[i])) {
        CHECK(std::isinf(a[i]));
      } else {
        CHECK(a[i] == b[i]);  // bit-exact
      }
    }
  }
}

TEST_CASE("mplp: unary-only instance") {
  MrfInstance inst;
  inst.topology.node_count = 3;
  inst.labels = 2;
  inst.unary = {3, 1, 0, 2, 5, 4};
  auto res = mplp_solve(inst, 10);
  CHECK(res.dual_value == doctest::Approx(1 + 0 + 4));
  CHECK(res.labeling == LabelAssignment{1, 0, 1});
}

TEST_CASE("mplp: exact on the two-node chain") {
  MrfInstance inst;
  inst.topology.node_count = 2;
  inst.topology.edges = {{0, 1, EdgeOrientation::None}};
  inst.labels = 3;
  inst.unary = {0, 1, 2, 2, 1, 0};
  inst.potentials.push_back(truncated_linear(3, 1.0));
  inst.edge_potential = {0};
  inst.edge_weight = {1.0};
  auto res = mplp_solve(inst, 50);
  CHECK(res.dual_value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(energy_of_labeling(inst, res.labeling) == doctest::Approx(1.0));
}

TEST_CASE("mplp: monotone dual and lower-bound property") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    auto inst = gen_random_instance(3, 3, 5, seed);
    auto res = mplp_solve(inst, 100);
    for (size_t i = 1; i < res.dual_per_sweep.size(); ++i) {
      CHECK(res.dual_per_sweep[i] >= res.dual_per_sweep[i - 1] - 1e-12);
    }
    auto [lab, opt] = oracle::brute_force_map(inst);
    CHECK(res.dual_value <= opt + 1e-9);
    // random labelings also upper-bound the dual value
    SplitMix64 rng(seed);
    for (int rep = 0; rep < 20; ++rep) {
      LabelAssignment a(inst.node_count());
      for (auto& l : a) l = static_cast<int>(rng.next_below(inst.labels));
      CHECK(res.dual_value <= energy_of_labeling(inst, a) + 1e-9);
    }
  }
}

TEST_CASE("mplp: tree instances are solved exactly") {
  // chains are trees, so the dual fixed point matches the MAP energy
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto inst = gen_random_instance(5, 1, 4, seed);
    auto res = mplp_solve(inst, 200);
    auto [lab, opt] = oracle::brute_force_map(inst);
    CHECK(res.dual_value == doctest::Approx(opt).epsilon(1e-7));
    CHECK(energy_of_labeling(inst, res.labeling) == doctest::Approx(opt).epsilon(1e-7));
  }
}
