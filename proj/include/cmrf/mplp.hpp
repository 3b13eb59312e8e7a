#pragma once

#include <vector>

#include "cmrf/model.hpp"

namespace cmrf {

// Sliding-window minimum: out[i] = min{ values[j] : i+lo <= j <= i+hi },
// clipped to valid indices; +inf where the window is empty. O(n) total via
// a monotone index deque.
std::vector<double> min_filter(const std::vector<double>& values, int lo, int hi);

// out[i] = min_j { theta_t[j] + w * p(j - i) }, computed piece by piece with
// min_filter in O(KL). Bit-identical to the naive double loop in
// oracle::naive_envelope.
std::vector<double> lower_envelope(const std::vector<double>& theta_t,
                                   const PiecewiseLinearPotential& p, double w);

struct MessageState {
  // message[2*e]   : from edge e into its s endpoint (length L each)
  // message[2*e+1] : from edge e into its t endpoint
  std::vector<std::vector<double>> message;
  // reparameterized unary theta_s + sum of incoming messages
  std::vector<double> belief;
};

struct MplpResult {
  double dual_value = 0.0;
  LabelAssignment labeling;
  MessageState state;
  std::vector<double> dual_per_sweep;
  int sweeps_run = 0;
};

// Dual block-coordinate ascent with the standard pairwise edge update;
// sweeps edges in construction order, both directions per visit. Stops
// after `sweeps` passes or when a full sweep improves the dual by less
// than 1e-9.
MplpResult mplp_solve(const MrfInstance& inst, int sweeps);

}  // namespace cmrf
