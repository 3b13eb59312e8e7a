#include "cmrf/mplp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>

namespace cmrf {

std::vector<double> min_filter(const std::vector<double>& values, int lo, int hi) {
  if (lo > hi) throw std::invalid_argument("min_filter: lo > hi");
  const int n = static_cast<int>(values.size());
  std::vector<double> out(n, kInfEnergy);
  std::deque<int> dq;  // indices with nondecreasing values
  int next = 0;
  for (int i = 0; i < n; ++i) {
    const int wlo = i + lo;
    const int whi = i + hi;
    while (next <= whi && next < n) {
      while (!dq.empty() && values[dq.back()] >= values[next]) dq.pop_back();
      dq.push_back(next);
      ++next;
    }
    while (!dq.empty() && dq.front() < wlo) dq.pop_front();
    if (!dq.empty()) out[i] = values[dq.front()];
  }
  return out;
}

std::vector<double> lower_envelope(const std::vector<double>& theta_t,
                                   const PiecewiseLinearPotential& p, double w) {
  const int L = static_cast<int>(theta_t.size());
  std::vector<double> out(L, kInfEnergy);
  std::vector<double> f(L);
  for (const auto& piece : p.pieces()) {
    const double wa = w * piece.alpha;
    const double wb = w * piece.beta;
    for (int j = 0; j < L; ++j) f[j] = theta_t[j] + wa * j;
    std::vector<double> filt = min_filter(f, piece.h_lo, piece.h_hi);
    for (int i = 0; i < L; ++i) {
      double cand = filt[i] - wa * i + wb;
      if (cand < out[i]) out[i] = cand;
    }
  }
  return out;
}

namespace {

double edge_term(const std::vector<double>& msg_s, const std::vector<double>& msg_t,
                 const PiecewiseLinearPotential& pot, double w) {
  // min_{i,j} ( w * pot(j - i) - msg_s[i] - msg_t[j] )
  const int L = static_cast<int>(msg_s.size());
  std::vector<double> neg_t(L);
  for (int j = 0; j < L; ++j) neg_t[j] = -msg_t[j];
  std::vector<double> env = lower_envelope(neg_t, pot, w);
  double best = kInfEnergy;
  for (int i = 0; i < L; ++i) best = std::min(best, env[i] - msg_s[i]);
  return best;
}

}  // namespace

MplpResult mplp_solve(const MrfInstance& inst, int sweeps) {
  inst.validate();
  if (!inst.all_piecewise_linear()) {
    throw std::invalid_argument("mplp_solve: piecewise-linear potentials required");
  }
  const int L = inst.labels;
  const int N = inst.node_count();
  const int E = inst.edge_count();

  MplpResult res;
  res.state.message.assign(2 * static_cast<size_t>(E), std::vector<double>(L, 0.0));
  res.state.belief = inst.unary;

  std::map<int, PiecewiseLinearPotential> reflected;
  for (int e = 0; e < E; ++e) {
    int pid = inst.edge_potential[e];
    if (!reflected.count(pid)) {
      reflected.emplace(pid, std::get<PiecewiseLinearPotential>(inst.potentials[pid]).reflected());
    }
  }

  auto dual_value = [&]() {
    double g = 0.0;
    for (int s = 0; s < N; ++s) {
      const double* b = res.state.belief.data() + static_cast<size_t>(s) * L;
      g += *std::min_element(b, b + L);
    }
    for (int e = 0; e < E; ++e) {
      const auto& pot = std::get<PiecewiseLinearPotential>(inst.potential_of(e));
      g += edge_term(res.state.message[2 * e], res.state.message[2 * e + 1], pot,
                     inst.edge_weight[e]);
    }
    return g;
  };

  std::vector<double> db_s(L), db_t(L);
  double prev = -kInfEnergy;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (int e = 0; e < E; ++e) {
      const auto& edge = inst.topology.edges[e];
      const double w = inst.edge_weight[e];
      const auto& pot = std::get<PiecewiseLinearPotential>(inst.potential_of(e));
      auto& msg_s = res.state.message[2 * e];
      auto& msg_t = res.state.message[2 * e + 1];
      double* bel_s = res.state.belief.data() + static_cast<size_t>(edge.s) * L;
      double* bel_t = res.state.belief.data() + static_cast<size_t>(edge.t) * L;
      for (int i = 0; i < L; ++i) {
        db_s[i] = bel_s[i] - msg_s[i];
        db_t[i] = bel_t[i] - msg_t[i];
      }
      std::vector<double> env_s = lower_envelope(db_t, pot, w);
      std::vector<double> env_t = lower_envelope(db_s, reflected.at(inst.edge_potential[e]), w);
      for (int i = 0; i < L; ++i) {
        msg_s[i] = 0.5 * (env_s[i] - db_s[i]);
        msg_t[i] = 0.5 * (env_t[i] - db_t[i]);
        bel_s[i] = db_s[i] + msg_s[i];
        bel_t[i] = db_t[i] + msg_t[i];
      }
    }
    double g = dual_value();
    res.dual_per_sweep.push_back(g);
    res.sweeps_run = sweep + 1;
    if (g - prev < 1e-9 && sweep > 0) {
      prev = g;
      break;
    }
    prev = g;
  }
  res.dual_value = prev;

  res.labeling.resize(N);
  for (int s = 0; s < N; ++s) {
    const double* b = res.state.belief.data() + static_cast<size_t>(s) * L;
    res.labeling[s] = static_cast<int>(std::min_element(b, b + L) - b);
  }
  return res;
}

}  // namespace cmrf
