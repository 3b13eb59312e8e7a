#pragma once

#include <limits>
#include <utility>
#include <vector>

namespace cmrf {

inline constexpr double kInfEnergy = std::numeric_limits<double>::infinity();

// One linear segment alpha*h + beta restricted to integer label differences
// h in [h_lo, h_hi].
struct BoundedLinearPiece {
  double alpha = 0.0;
  double beta = 0.0;
  int h_lo = 0;
  int h_hi = 0;

  double value_at(int h) const { return alpha * static_cast<double>(h) + beta; }
  bool covers(int h) const { return h >= h_lo && h <= h_hi; }
};

// Pairwise potential of the label difference, stored as the pointwise
// minimum of bounded linear pieces. Piece domains may overlap; evaluation
// at a point not covered by any piece yields +inf.
class PiecewiseLinearPotential {
 public:
  PiecewiseLinearPotential() = default;
  explicit PiecewiseLinearPotential(std::vector<BoundedLinearPiece> pieces)
      : pieces_(std::move(pieces)) {}

  const std::vector<BoundedLinearPiece>& pieces() const { return pieces_; }
  int piece_count() const { return static_cast<int>(pieces_.size()); }

  double evaluate(int h) const;

  // Index of the covering piece with the smallest value at h (smallest index
  // on ties); -1 if no piece covers h.
  int argmin_piece(int h) const;

  // Potential mirrored in h: p(-h).
  PiecewiseLinearPotential reflected() const;

  // true if every piece has symmetric full-range shape a*|h| + b once bound
  // to L labels; used by the L1-specialized program builder.
  bool is_min_of_l1(int labels) const;

  // Extracts the (a, b) parameters of min_k {a_k |h| + b_k}; requires
  // is_min_of_l1. Zero-slope full-range pieces count as a=0 terms.
  std::vector<std::pair<double, double>> l1_terms(int labels) const;

 private:
  std::vector<BoundedLinearPiece> pieces_;
};

struct HingeTerm {
  double gamma = 0.0;  // positive slope increase
  int delta = 0;       // evaluation is [gamma * (h + delta)]_+
};

// Convex pairwise potential alpha*h + beta + sum_k [gamma_k (h + delta_k)]_+,
// optionally hard-restricted to h in [h_lo, h_hi] (the infinite-slope limit
// of additional hinges).
struct ConvexHingePotential {
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<HingeTerm> hinges;
  int h_lo = std::numeric_limits<int>::min();
  int h_hi = std::numeric_limits<int>::max();

  bool bounded_below() const { return h_lo != std::numeric_limits<int>::min(); }
  bool bounded_above() const { return h_hi != std::numeric_limits<int>::max(); }

  double evaluate(int h) const;
};

// Reconstructs the minimum-run piecewise linear representation from the
// 2L-1 samples values[h + L - 1], h = -(L-1) .. L-1. Pieces are maximal
// collinear runs (runs on the same line are merged into one piece), with
// domains grown as far as the line stays above the remaining samples.
PiecewiseLinearPotential from_samples(const std::vector<double>& values);

// Converts max_k {slope_k h + intercept_k} to hinge form. Throws if the
// upper envelope has a non-integral breakpoint or the input is empty.
ConvexHingePotential max_affine_to_hinge(
    const std::vector<std::pair<double, double>>& affines);

// Pointwise minimum: concatenation of the piece lists.
PiecewiseLinearPotential min_of(const std::vector<PiecewiseLinearPotential>& potentials);

// Truncated linear min{|h|, tau} over the full difference range of an
// L-label problem, in the three-piece form used throughout.
PiecewiseLinearPotential truncated_linear(int labels, double tau);

// a*|h| + b as a two-piece potential (single flat piece when a == 0).
PiecewiseLinearPotential l1_potential(int labels, double a, double b);

// Hard constraint |h| <= bound.
PiecewiseLinearPotential lipschitz_pwl(int bound);
ConvexHingePotential lipschitz_hinge(int bound);

}  // namespace cmrf
