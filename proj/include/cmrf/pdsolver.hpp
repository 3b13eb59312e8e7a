#pragma once

#include <string>
#include <vector>

#include "cmrf/model.hpp"
#include "cmrf/program.hpp"

namespace cmrf {

struct SolverConfig {
  long long max_iters = 100000;
  int check_every = 250;
  double tol_gap = 1e-6;
  double overrelax = 1.0;  // extrapolation x_bar = x + overrelax * (x - x_prev)
  int threads = 1;         // 1 = deterministic reference mode
};

struct Preconditioners {
  std::vector<double> tau;    // per primal variable, 1 / column abs sum
  std::vector<double> sigma;  // per dual row, 1 / row abs sum
  bool floored = false;       // an empty row or column was floored at 1e-12
};

Preconditioners compute_preconditioners(const StructuredProgram& prog);

// reference operator applications over the atom lists (running sums for
// prefix atoms); the solver's specialized kernels must match these exactly
void apply_forward(const StructuredProgram& prog, const std::vector<double>& x,
                   std::vector<double>& out);
void apply_adjoint(const StructuredProgram& prog, const std::vector<double>& p,
                   std::vector<double>& out);

void prox_simplex(double* v, int dim);
std::vector<double> prox_simplex(std::vector<double> v);
double prox_interval(double v, double lo, double hi);
void prox_l2ball(double* v, int dim, double radius);

// simplex projection in the diag(1/tau) metric; reduces to prox_simplex for
// constant tau
void prox_simplex_weighted(double* v, const double* tau, int dim);

// Lagrangian lower bound at a prox-feasible dual point
double dual_bound(const StructuredProgram& prog, const std::vector<double>& p);

struct TracePoint {
  long long iter = 0;
  double primal_energy = 0.0;  // true energy of the rounded labeling
  double dual_bound = 0.0;
  double gap = 0.0;
};

struct EnergyTrace {
  std::vector<TracePoint> points;
  std::string to_csv() const;
};

enum class TerminationReason { Tolerance, MaxIters, NonFinite };

struct SolveResult {
  std::vector<double> x;
  std::vector<double> p;
  EnergyTrace trace;
  TerminationReason reason = TerminationReason::MaxIters;
  long long iters = 0;
  LabelAssignment best_labeling;
  double best_energy = 0.0;      // energy of the best rounded labeling
  double best_dual_bound = 0.0;  // max Lagrangian bound seen
  double final_gap = 0.0;
  double lp_objective = 0.0;     // primal functional at the final iterate
  double max_eq_violation = 0.0;
  bool precond_floored = false;
};

// Preconditioned primal-dual iteration, everything initialized to zero:
//   p   <- prox_dual(p + sigma .* K x_bar)
//   x   <- prox_primal(x - tau .* (K^T p + c))
//   x_bar = 2x - x_prev
// Stops on the relative gap between the best rounded energy and the dual
// bound, or when the linear objective and dual bound have met and the
// equality residuals are negligible, or at max_iters.
SolveResult solve(const StructuredProgram& prog, const MrfInstance& inst,
                  const SolverConfig& cfg);

}  // namespace cmrf
