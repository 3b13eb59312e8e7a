#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cmrf/model.hpp"
#include "cmrf/pdsolver.hpp"
#include "cmrf/program.hpp"

namespace cmrf::oracle {

// exhaustive search, lexicographically smallest argmin; throws when
// labels^nodes exceeds 10^7
std::pair<LabelAssignment, double> brute_force_map(const MrfInstance& inst);

// direct O(K L^2) reference for mplp::lower_envelope; candidate values are
// computed with the same floating-point expressions, so agreement is exact
std::vector<double> naive_envelope(const std::vector<double>& theta_t,
                                   const PiecewiseLinearPotential& p, double w);

// dense materialization of the dual-rows x primal operator (small programs)
std::vector<std::vector<double>> dense_operator(const StructuredProgram& prog);
std::vector<double> naive_apply(const StructuredProgram& prog,
                                const std::vector<double>& v, bool adjoint);

struct EquivalenceRecord {
  std::uint64_t seed = 0;
  double opt_full = 0.0;
  double opt_compact = 0.0;
  double rel_diff = 0.0;
  bool converged = false;
};

struct EquivalenceReport {
  std::vector<EquivalenceRecord> records;
  double max_rel_diff = 0.0;
  int nonconverged = 0;
  std::string to_csv() const;
};

// random grid instance whose pairwise potential is a pointwise minimum of
// bounded linear pieces with overlapping domains (dyadic coefficients)
MrfInstance gen_harness_instance(int width, int height, int labels, int max_pieces,
                                 std::uint64_t seed);

// solves build_full_lp and build_compact on random instances and records
// the relative difference of the converged optimal values
EquivalenceReport equivalence_harness(int seed_count, int width, int height, int labels,
                                      int max_pieces, const SolverConfig& cfg,
                                      std::uint64_t base_seed = 1);

}  // namespace cmrf::oracle
