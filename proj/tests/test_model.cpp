#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "cmrf/model.hpp"
#include "cmrf/rng.hpp"
#include "cmrf/oracle.hpp"

using namespace cmrf;

namespace {

MrfInstance two_node_chain() {
  // L=3, theta_1=(0,1,2), theta_2=(2,1,0), truncated linear min{|h|,1}
  MrfInstance inst;
  inst.topology.node_count = 2;
  inst.topology.edges = {{0, 1, EdgeOrientation::None}};
  inst.labels = 3;
  inst.unary = {0, 1, 2, 2, 1, 0};
  inst.potentials.push_back(truncated_linear(3, 1.0));
  inst.edge_potential = {0};
  inst.edge_weight = {1.0};
  return inst;
}

}  // namespace

TEST_CASE("energy_of_labeling on the two-node chain") {
  auto inst = two_node_chain();
  CHECK(energy_of_labeling(inst, {0, 2}) == 1.0);
  CHECK(energy_of_labeling(inst, {1, 1}) == 2.0);
  auto [lab, e] = oracle::brute_force_map(inst);
  CHECK(e == 1.0);
  CHECK(lab == LabelAssignment{0, 2});
}

TEST_CASE("energy: single node") {
  MrfInstance inst;
  inst.topology.node_count = 1;
  inst.labels = 1;
  inst.unary = {5.0};
  CHECK(energy_of_labeling(inst, {0}) == 5.0);
}

TEST_CASE("energy: hard constraint gives the infinity sentinel") {
  auto inst = two_node_chain();
  inst.potentials[0] = lipschitz_pwl(1);
  CHECK(std::isinf(energy_of_labeling(inst, {0, 2})));
  CHECK(energy_of_labeling(inst, {0, 1}) == 1.0);
}

TEST_CASE("energy: size mismatch throws") {
  auto inst = two_node_chain();
  CHECK_THROWS_AS(energy_of_labeling(inst, {0}), std::invalid_argument);
}

TEST_CASE("make_grid edge counts and stencil") {
  CHECK(make_grid(2, 2).edges.size() == 4);
  CHECK(make_grid(1, 1).edges.size() == 0);
  CHECK(make_grid(20, 20).edges.size() == 760);
  CHECK_THROWS_AS(make_grid(0, 3), std::invalid_argument);

  auto g = make_grid(3, 2);
  CHECK(g.node_count == 6);
  int horiz = 0, vert = 0;
  for (const auto& e : g.edges) {
    if (e.orient == EdgeOrientation::Horizontal) {
      CHECK(e.t == e.s + 1);
      ++horiz;
    } else {
      CHECK(e.t == e.s + 3);
      ++vert;
    }
  }
  CHECK(horiz == 4);
  CHECK(vert == 3);
}

TEST_CASE("gen_random_instance: shape, determinism, ranges") {
  auto a = gen_random_instance(20, 20, 20, 42);
  CHECK(a.node_count() == 400);
  CHECK(a.edge_count() == 760);
  for (double u : a.unary) {
    CHECK(u >= 0.0);
    CHECK(u < 2.0);
  }
  for (double w : a.edge_weight) {
    CHECK(w >= 0.0);
    CHECK(w < 1.0);
  }
  auto b = gen_random_instance(20, 20, 20, 42);
  CHECK(a.unary == b.unary);
  CHECK(a.edge_weight == b.edge_weight);
  auto c = gen_random_instance(2, 1, 4, 1);
  CHECK(c.edge_count() == 1);
  CHECK(oracle::brute_force_map(c).second <= 4.0 + 2.0);
}

TEST_CASE("gen_random_instance: unary mean close to 1") {
  auto inst = gen_random_instance(25, 20, 20, 7);  // 10^4 draws
  double mean = 0;
  for (double u : inst.unary) mean += u;
  mean /= static_cast<double>(inst.unary.size());
  CHECK(std::abs(mean - 1.0) < 0.05);
}

TEST_CASE("round_superlevel") {
  CHECK(round_superlevel({0.1, 0.2, 0.7}) == 2);
  CHECK(round_superlevel({0, 0, 0, 1.0}) == 3);
  CHECK(round_superlevel({0.5, 0.5}) == 1);
  for (int i = 0; i < 5; ++i) {
    std::vector<double> x(5, 0.0);
    x[i] = 1.0;
    CHECK(round_superlevel(x) == i);
  }
  // renormalizes internally
  CHECK(round_superlevel({0.2, 0.4, 1.4}) == 2);
}

TEST_CASE("instance json round trip") {
  auto inst = gen_random_instance(3, 2, 4, 9);
  auto path = std::filesystem::temp_directory_path() / "cmrf_test_instance.json";
  write_instance(inst, path.string());
  auto back = read_instance(path.string());
  CHECK(back.labels == inst.labels);
  CHECK(back.node_count() == inst.node_count());
  CHECK(back.edge_count() == inst.edge_count());
  CHECK(back.unary == inst.unary);
  CHECK(back.edge_weight == inst.edge_weight);
  for (int e = 0; e < inst.edge_count(); ++e) {
    CHECK(back.topology.edges[e].s == inst.topology.edges[e].s);
    CHECK(back.topology.edges[e].t == inst.topology.edges[e].t);
    for (int h = -3; h <= 3; ++h) {
      CHECK(evaluate_potential(back.potential_of(e), h) ==
            evaluate_potential(inst.potential_of(e), h));
    }
  }
  std::filesystem::remove(path);

  // hinge potentials round trip too
  MrfInstance hi;
  hi.topology.node_count = 2;
  hi.topology.edges = {{0, 1, EdgeOrientation::None}};
  hi.labels = 4;
  hi.unary.assign(8, 0.5);
  ConvexHingePotential h;
  h.alpha = -1;
  h.hinges = {{2.0, 0}};
  h.h_lo = -2;
  h.h_hi = 3;
  hi.potentials.push_back(h);
  hi.edge_potential = {0};
  hi.edge_weight = {0.5};
  auto text = instance_to_json_text(hi);
  auto back2 = instance_from_json_text(text);
  for (int d = -3; d <= 3; ++d) {
    double a = evaluate_potential(hi.potential_of(0), d);
    double b = evaluate_potential(back2.potential_of(0), d);
    if (std::isinf(a)) {
      CHECK(std::isinf(b));
    } else {
      CHECK(a == b);
    }
  }
}

TEST_CASE("instance json validation errors") {
  const char* bad_bounds = R"({"labels":2,"width":2,"height":1,
    "unary":[0,0,0,0],
    "potentials":[{"pieces":[[0,0,1,-1]]}],
    "edge_potential":[0],"edge_weight":[1.0]})";
  CHECK_THROWS_AS(instance_from_json_text(bad_bounds), std::invalid_argument);

  const char* bad_unary = R"({"labels":2,"width":2,"height":1,
    "unary":[0,0,0],
    "potentials":[{"pieces":[[0,0,-1,1]]}],
    "edge_potential":[0],"edge_weight":[1.0]})";
  CHECK_THROWS_AS(instance_from_json_text(bad_unary), std::invalid_argument);

  CHECK_THROWS_AS(instance_from_json_text("{not json"), std::invalid_argument);

  const char* frac_bounds = R"({"labels":2,"width":2,"height":1,
    "unary":[0,0,0,0],
    "potentials":[{"pieces":[[0,0,-1,0.5]]}],
    "edge_potential":[0],"edge_weight":[1.0]})";
  CHECK_THROWS_AS(instance_from_json_text(frac_bounds), std::invalid_argument);
}

TEST_CASE("energy cross-check against an inline re-implementation") {
  // independent evaluation straight from the piece lists
  auto naive_energy = [](const MrfInstance& inst, const LabelAssignment& a) {
    double e = 0.0;
    for (int s = 0; s < inst.node_count(); ++s) {
      e += inst.unary[static_cast<size_t>(s) * inst.labels + a[s]];
    }
    for (int k = 0; k < inst.edge_count(); ++k) {
      const auto& edge = inst.topology.edges[k];
      const int h = a[edge.t] - a[edge.s];
      const auto& pot = inst.potentials[inst.edge_potential[k]];
      double best = kInfEnergy;
      if (const auto* pwl = std::get_if<PiecewiseLinearPotential>(&pot)) {
        for (const auto& p : pwl->pieces()) {
          if (h >= p.h_lo && h <= p.h_hi) best = std::min(best, p.alpha * h + p.beta);
        }
      } else {
        const auto& hp = std::get<ConvexHingePotential>(pot);
        if (h < hp.h_lo || h > hp.h_hi) {
          best = kInfEnergy;
        } else {
          best = hp.alpha * h + hp.beta;
          for (const auto& t : hp.hinges) best += std::max(0.0, t.gamma * (h + t.delta));
        }
      }
      if (std::isinf(best)) return kInfEnergy;
      e += inst.edge_weight[k] * best;
    }
    return e;
  };
  SplitMix64 rng(99);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto inst = gen_random_instance(3, 3, 5, seed);
    for (int rep = 0; rep < 50; ++rep) {
      LabelAssignment a(inst.node_count());
      for (auto& l : a) l = static_cast<int>(rng.next_below(inst.labels));
      CHECK(energy_of_labeling(inst, a) == naive_energy(inst, a));
    }
  }
}
