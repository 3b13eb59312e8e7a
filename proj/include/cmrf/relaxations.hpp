#pragma once

#include <vector>

#include "cmrf/model.hpp"
#include "cmrf/program.hpp"

namespace cmrf {

enum class CompactStyle { General, L1Min };
enum class IsoVariant { JointTerms, JointBranch };

// Standard relaxation: simplex block per node, one L*L marginal block per
// edge (L^2 primal unknowns per edge), 2L marginalization equalities per
// edge. Pairwise entries with infinite energy are not materialized.
StructuredProgram build_full_lp(const MrfInstance& inst);

// Superlevel program for convex hinge priors: node simplex blocks only;
// hinge terms become weighted one-sided rows on cumulative sums, hard
// domain bounds become one-sided constraints.
StructuredProgram build_convex_lp(const MrfInstance& inst);

// Compact reformulation for minima of bounded linear pieces: 2KL primal
// unknowns and at most 2L(K+1)+K rows per edge. L1Min specializes to
// minima of a_k|h| + b_k terms with absolute-value rows.
StructuredProgram build_compact(const MrfInstance& inst, CompactStyle style);
// picks L1Min when every edge potential decomposes into L1 terms
StructuredProgram build_compact(const MrfInstance& inst);

// Grid-bias-reduced variants on homogeneous symmetric grids. JointTerms
// couples horizontal/vertical terms per level with Euclidean groups;
// JointBranch shares one branch selector per pixel across both directions.
StructuredProgram build_compact_isotropic(const MrfInstance& inst, IsoVariant variant);

struct SizeReport {
  long long total_primal = 0;
  long long total_dual_rows = 0;
  long long node_primal = 0;
  std::vector<long long> per_edge_primal;  // one entry per edge/pixel structure
  std::vector<long long> per_edge_rows;
};

SizeReport count_sizes(const StructuredProgram& prog);

// Primal point representing an integral labeling: one-hot node blocks plus
// the matching edge variables (active branch = lexicographically smallest
// argmin piece). Throws when the labeling violates a hard constraint.
std::vector<double> lift_labeling(const MrfInstance& inst, const LabelAssignment& a,
                                  const StructuredProgram& prog);

// Energy the isotropic programs assign to an integral labeling (Euclidean
// coupling of horizontal/vertical jumps); equals the anisotropic energy
// when no pixel jumps in both directions under one branch.
double iso_energy_of_labeling(const MrfInstance& inst, const LabelAssignment& a,
                              IsoVariant variant);

}  // namespace cmrf
