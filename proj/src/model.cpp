#include "cmrf/model.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "cmrf/rng.hpp"

namespace cmrf {

GraphTopology make_grid(int width, int height) {
  if (width < 1 || height < 1) throw std::invalid_argument("make_grid: empty dimension");
  GraphTopology g;
  g.node_count = width * height;
  g.grid = GridInfo{width, height};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      int s = y * width + x;
      if (x + 1 < width) g.edges.push_back({s, s + 1, EdgeOrientation::Horizontal});
      if (y + 1 < height) g.edges.push_back({s, s + width, EdgeOrientation::Vertical});
    }
  }
  return g;
}

double evaluate_potential(const PairwisePotential& p, int h) {
  return std::visit([h](const auto& q) { return q.evaluate(h); }, p);
}

bool MrfInstance::all_piecewise_linear() const {
  for (int idx : edge_potential) {
    if (!std::holds_alternative<PiecewiseLinearPotential>(potentials[idx])) return false;
  }
  return true;
}

bool MrfInstance::all_convex_hinge() const {
  for (int idx : edge_potential) {
    if (!std::holds_alternative<ConvexHingePotential>(potentials[idx])) return false;
  }
  return true;
}

void MrfInstance::validate() const {
  const int n = topology.node_count;
  if (labels < 1) throw std::invalid_argument("instance: labels must be >= 1");
  if (static_cast<size_t>(n) * labels != unary.size()) {
    throw std::invalid_argument("instance: unary table size mismatch");
  }
  if (edge_potential.size() != topology.edges.size() ||
      edge_weight.size() != topology.edges.size()) {
    throw std::invalid_argument("instance: per-edge array size mismatch");
  }
  for (const auto& e : topology.edges) {
    if (e.s == e.t) throw std::invalid_argument("instance: self edge");
    if (e.s < 0 || e.t < 0 || e.s >= n || e.t >= n) {
      throw std::invalid_argument("instance: edge index out of range");
    }
  }
  const int r = labels - 1;
  for (const auto& pot : potentials) {
    if (const auto* pwl = std::get_if<PiecewiseLinearPotential>(&pot)) {
      for (const auto& p : pwl->pieces()) {
        if (p.h_lo > p.h_hi) throw std::invalid_argument("instance: piece with h_lo > h_hi");
        if (p.h_lo < -r || p.h_hi > r) {
          throw std::invalid_argument("instance: piece domain outside label range");
        }
      }
    }
  }
  for (double w : edge_weight) {
    if (w < 0.0) throw std::invalid_argument("instance: negative edge weight");
  }
}

double energy_of_labeling(const MrfInstance& inst, const LabelAssignment& a) {
  if (static_cast<int>(a.size()) != inst.node_count()) {
    throw std::invalid_argument("energy_of_labeling: labeling size mismatch");
  }
  double e = 0.0;
  for (int s = 0; s < inst.node_count(); ++s) {
    if (a[s] < 0 || a[s] >= inst.labels) {
      throw std::invalid_argument("energy_of_labeling: label out of range");
    }
    e += inst.unary_at(s, a[s]);
  }
  for (int k = 0; k < inst.edge_count(); ++k) {
    const auto& edge = inst.topology.edges[k];
    int h = a[edge.t] - a[edge.s];
    double v = evaluate_potential(inst.potential_of(k), h);
    if (std::isinf(v)) return kInfEnergy;
    e += inst.edge_weight[k] * v;
  }
  return e;
}

MrfInstance gen_random_instance(int width, int height, int labels, std::uint64_t seed) {
  SplitMix64 rng(seed);
  MrfInstance inst;
  inst.topology = make_grid(width, height);
  inst.labels = labels;
  inst.unary.resize(static_cast<size_t>(inst.node_count()) * labels);
  for (auto& u : inst.unary) u = rng.uniform(0.0, 2.0);
  inst.potentials.push_back(truncated_linear(labels, 2.0));
  inst.edge_potential.assign(inst.edge_count(), 0);
  inst.edge_weight.resize(inst.edge_count());
  for (auto& w : inst.edge_weight) w = rng.uniform(0.0, 1.0);
  return inst;
}

int round_superlevel(const double* x, int labels) {
  double total = 0.0;
  for (int i = 0; i < labels; ++i) total += x[i];
  if (total <= 0.0) return 0;
  // largest i whose cumulative mass below it has not crossed 1/2; an exact
  // tie at 1/2 keeps ascending
  double cum = 0.0;
  int label = 0;
  for (int i = 1; i < labels; ++i) {
    cum += x[i - 1] / total;
    if (cum <= 0.5) label = i;
  }
  return label;
}

int round_superlevel(const std::vector<double>& x) {
  return round_superlevel(x.data(), static_cast<int>(x.size()));
}

namespace {

using nlohmann::json;

json potential_to_json(const PairwisePotential& pot) {
  json j;
  if (const auto* pwl = std::get_if<PiecewiseLinearPotential>(&pot)) {
    json pieces = json::array();
    for (const auto& p : pwl->pieces()) {
      pieces.push_back({p.alpha, p.beta, p.h_lo, p.h_hi});
    }
    j["pieces"] = pieces;
  } else {
    const auto& h = std::get<ConvexHingePotential>(pot);
    json hj;
    hj["alpha"] = h.alpha;
    hj["beta"] = h.beta;
    json terms = json::array();
    for (const auto& t : h.hinges) terms.push_back({t.gamma, t.delta});
    hj["terms"] = terms;
    if (h.bounded_below()) hj["h_lo"] = h.h_lo;
    if (h.bounded_above()) hj["h_hi"] = h.h_hi;
    j["hinges"] = hj;
  }
  return j;
}

PairwisePotential potential_from_json(const json& j) {
  if (j.contains("pieces")) {
    std::vector<BoundedLinearPiece> pieces;
    for (const auto& pj : j.at("pieces")) {
      if (!pj.is_array() || pj.size() != 4) {
        throw std::invalid_argument("instance file: malformed piece");
      }
      BoundedLinearPiece p;
      p.alpha = pj[0].get<double>();
      p.beta = pj[1].get<double>();
      if (!pj[2].is_number_integer() || !pj[3].is_number_integer()) {
        throw std::invalid_argument("instance file: non-integral piece bounds");
      }
      p.h_lo = pj[2].get<int>();
      p.h_hi = pj[3].get<int>();
      pieces.push_back(p);
    }
    return PiecewiseLinearPotential(std::move(pieces));
  }
  if (j.contains("hinges")) {
    const auto& hj = j.at("hinges");
    ConvexHingePotential h;
    h.alpha = hj.value("alpha", 0.0);
    h.beta = hj.value("beta", 0.0);
    if (hj.contains("terms")) {
      for (const auto& tj : hj.at("terms")) {
        HingeTerm t;
        t.gamma = tj[0].get<double>();
        if (!tj[1].is_number_integer()) {
          throw std::invalid_argument("instance file: non-integral hinge shift");
        }
        t.delta = tj[1].get<int>();
        if (t.gamma <= 0.0) throw std::invalid_argument("instance file: hinge gamma must be > 0");
        h.hinges.push_back(t);
      }
    }
    if (hj.contains("h_lo")) h.h_lo = hj.at("h_lo").get<int>();
    if (hj.contains("h_hi")) h.h_hi = hj.at("h_hi").get<int>();
    return h;
  }
  throw std::invalid_argument("instance file: potential needs 'pieces' or 'hinges'");
}

}  // namespace

std::string instance_to_json_text(const MrfInstance& inst) {
  json j;
  j["labels"] = inst.labels;
  if (inst.topology.grid) {
    j["width"] = inst.topology.grid->width;
    j["height"] = inst.topology.grid->height;
  } else {
    json edges = json::array();
    for (const auto& e : inst.topology.edges) edges.push_back({e.s, e.t});
    j["edges"] = edges;
    j["nodes"] = inst.topology.node_count;
  }
  j["unary"] = inst.unary;
  json pots = json::array();
  for (const auto& p : inst.potentials) pots.push_back(potential_to_json(p));
  j["potentials"] = pots;
  j["edge_potential"] = inst.edge_potential;
  j["edge_weight"] = inst.edge_weight;
  return j.dump(1);
}

MrfInstance instance_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("instance file: ") + e.what());
  }
  MrfInstance inst;
  inst.labels = j.at("labels").get<int>();
  if (j.contains("width") && j.contains("height")) {
    inst.topology = make_grid(j.at("width").get<int>(), j.at("height").get<int>());
  } else {
    GraphTopology g;
    for (const auto& ej : j.at("edges")) {
      g.edges.push_back({ej[0].get<int>(), ej[1].get<int>(), EdgeOrientation::None});
    }
    int max_idx = -1;
    for (const auto& e : g.edges) max_idx = std::max({max_idx, e.s, e.t});
    g.node_count = j.contains("nodes") ? j.at("nodes").get<int>() : max_idx + 1;
    inst.topology = std::move(g);
  }
  inst.unary = j.at("unary").get<std::vector<double>>();
  for (const auto& pj : j.at("potentials")) inst.potentials.push_back(potential_from_json(pj));
  inst.edge_potential = j.at("edge_potential").get<std::vector<int>>();
  if (j.contains("edge_weight")) {
    inst.edge_weight = j.at("edge_weight").get<std::vector<double>>();
  } else {
    inst.edge_weight.assign(inst.topology.edges.size(), 1.0);
  }
  for (int idx : inst.edge_potential) {
    if (idx < 0 || idx >= static_cast<int>(inst.potentials.size())) {
      throw std::invalid_argument("instance file: edge_potential index out of range");
    }
  }
  inst.validate();
  return inst;
}

MrfInstance read_instance(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open instance file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return instance_from_json_text(ss.str());
}

void write_instance(const MrfInstance& inst, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write instance file: " + path);
  f << instance_to_json_text(inst) << "\n";
}

}  // namespace cmrf
