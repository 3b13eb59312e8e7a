#include "cmrf/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace cmrf {

double PiecewiseLinearPotential::evaluate(int h) const {
  double best = kInfEnergy;
  for (const auto& p : pieces_) {
    if (p.covers(h)) best = std::min(best, p.value_at(h));
  }
  return best;
}

int PiecewiseLinearPotential::argmin_piece(int h) const {
  int best = -1;
  double best_val = kInfEnergy;
  for (int k = 0; k < static_cast<int>(pieces_.size()); ++k) {
    if (!pieces_[k].covers(h)) continue;
    double v = pieces_[k].value_at(h);
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }
  return best;
}

PiecewiseLinearPotential PiecewiseLinearPotential::reflected() const {
  std::vector<BoundedLinearPiece> out;
  out.reserve(pieces_.size());
  for (const auto& p : pieces_) {
    out.push_back({-p.alpha, p.beta, -p.h_hi, -p.h_lo});
  }
  return PiecewiseLinearPotential(std::move(out));
}

bool PiecewiseLinearPotential::is_min_of_l1(int labels) const {
  const int r = labels - 1;
  std::vector<bool> used(pieces_.size(), false);
  for (size_t i = 0; i < pieces_.size(); ++i) {
    if (used[i]) continue;
    const auto& p = pieces_[i];
    if (p.alpha == 0.0 && p.h_lo <= -r && p.h_hi >= r) {
      used[i] = true;
      continue;
    }
    // needs a mirrored partner
    bool pos = p.alpha > 0.0;
    if (pos && !(p.h_lo == 0 && p.h_hi >= r)) return false;
    if (!pos && !(p.h_hi == 0 && p.h_lo <= -r)) return false;
    bool found = false;
    for (size_t j = i + 1; j < pieces_.size(); ++j) {
      if (used[j]) continue;
      const auto& q = pieces_[j];
      if (q.alpha != -p.alpha || q.beta != p.beta) continue;
      if (pos && !(q.h_hi == 0 && q.h_lo <= -r)) continue;
      if (!pos && !(q.h_lo == 0 && q.h_hi >= r)) continue;
      used[i] = used[j] = true;
      found = true;
      break;
    }
    if (!found) return false;
  }
  return true;
}

std::vector<std::pair<double, double>> PiecewiseLinearPotential::l1_terms(int labels) const {
  if (!is_min_of_l1(labels)) throw std::invalid_argument("potential is not a minimum of L1 terms");
  const int r = labels - 1;
  std::vector<std::pair<double, double>> terms;
  std::vector<bool> used(pieces_.size(), false);
  for (size_t i = 0; i < pieces_.size(); ++i) {
    if (used[i]) continue;
    const auto& p = pieces_[i];
    used[i] = true;
    if (p.alpha == 0.0 && p.h_lo <= -r && p.h_hi >= r) {
      terms.emplace_back(0.0, p.beta);
      continue;
    }
    for (size_t j = i + 1; j < pieces_.size(); ++j) {
      if (!used[j] && pieces_[j].alpha == -p.alpha && pieces_[j].beta == p.beta) {
        used[j] = true;
        break;
      }
    }
    terms.emplace_back(std::abs(p.alpha), p.beta);
  }
  return terms;
}

double ConvexHingePotential::evaluate(int h) const {
  if (h < h_lo || h > h_hi) return kInfEnergy;
  double v = alpha * static_cast<double>(h) + beta;
  for (const auto& t : hinges) {
    double a = t.gamma * static_cast<double>(h + t.delta);
    if (a > 0.0) v += a;
  }
  return v;
}

namespace {

struct Run {
  double slope;
  int start;  // sample indices, 0-based
  int end;
  double anchor;  // value at `start`
  double at(int idx) const { return anchor + slope * static_cast<double>(idx - start); }
};

}  // namespace

PiecewiseLinearPotential from_samples(const std::vector<double>& values) {
  const int n = static_cast<int>(values.size());
  if (n < 1 || n % 2 == 0) throw std::invalid_argument("from_samples: need 2L-1 samples");
  const int L = (n + 1) / 2;
  const int h0 = -(L - 1);

  double scale = 1.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  const double tol = 1e-12 * scale;
  auto near = [&](double a, double b) { return std::abs(a - b) <= tol; };
  // lines may only extend over samples they do not undercut, exactly
  auto geq = [&](double a, double b) { return a >= b; };

  // maximal collinear runs; a run may reclaim the previous run's last sample
  // when it continues the same line through it
  std::vector<Run> runs;
  int u = 0;
  while (u < n) {
    if (u == n - 1) {
      runs.push_back({0.0, u, u, values[u]});
      break;
    }
    double slope = values[u + 1] - values[u];
    int start = u;
    if (u > 0 && near(values[u] - values[u - 1], slope)) start = u - 1;
    int end = u + 1;
    while (end + 1 < n && near(values[end + 1] - values[end], slope)) ++end;
    runs.push_back({slope, start, end, values[start]});
    u = end + 1;
  }

  // merge runs lying on one line, provided the line dominates the samples in
  // between (minimum semantics keeps evaluation exact there)
  std::vector<Run> merged;
  for (const auto& r : runs) {
    bool absorbed = false;
    for (auto& m : merged) {
      if (!near(m.slope, r.slope) || !near(m.at(r.start), r.anchor)) continue;
      bool dominates = true;
      for (int idx = m.end + 1; idx < r.start && dominates; ++idx) {
        dominates = geq(m.at(idx), values[idx]);
      }
      if (!dominates) continue;
      m.end = r.end;
      absorbed = true;
      break;
    }
    if (!absorbed) merged.push_back(r);
  }

  // grow domains while the line stays above the samples
  std::vector<BoundedLinearPiece> pieces;
  pieces.reserve(merged.size());
  for (const auto& m : merged) {
    int lo = m.start;
    while (lo > 0 && geq(m.at(lo - 1), values[lo - 1])) --lo;
    int hi = m.end;
    while (hi + 1 < n && geq(m.at(hi + 1), values[hi + 1])) ++hi;
    BoundedLinearPiece p;
    p.alpha = m.slope;
    p.beta = m.anchor - m.slope * static_cast<double>(m.start + h0);
    p.h_lo = lo + h0;
    p.h_hi = hi + h0;
    pieces.push_back(p);
  }

  // drop pieces the remaining ones already explain
  for (size_t i = pieces.size(); i-- > 0;) {
    PiecewiseLinearPotential rest([&] {
      std::vector<BoundedLinearPiece> r;
      for (size_t j = 0; j < pieces.size(); ++j) {
        if (j != i) r.push_back(pieces[j]);
      }
      return r;
    }());
    bool redundant = !rest.pieces().empty();
    for (int idx = 0; idx < n && redundant; ++idx) {
      redundant = near(rest.evaluate(idx + h0), values[idx]);
    }
    if (redundant) {
      pieces.erase(pieces.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }
  return PiecewiseLinearPotential(std::move(pieces));
}

ConvexHingePotential max_affine_to_hinge(
    const std::vector<std::pair<double, double>>& affines) {
  if (affines.empty()) throw std::invalid_argument("max_affine_to_hinge: empty input");

  std::vector<std::pair<double, double>> lines = affines;
  std::sort(lines.begin(), lines.end());
  // equal slopes: only the largest intercept can attain the max
  std::vector<std::pair<double, double>> uniq;
  for (const auto& l : lines) {
    if (!uniq.empty() && uniq.back().first == l.first) {
      uniq.back().second = std::max(uniq.back().second, l.second);
    } else {
      uniq.push_back(l);
    }
  }

  // upper envelope by increasing slope
  auto cross = [](const std::pair<double, double>& a, const std::pair<double, double>& b) {
    return (a.second - b.second) / (b.first - a.first);
  };
  std::vector<std::pair<double, double>> hull;
  for (const auto& l : uniq) {
    while (hull.size() >= 2 &&
           cross(hull[hull.size() - 2], l) <= cross(hull[hull.size() - 2], hull.back())) {
      hull.pop_back();
    }
    hull.push_back(l);
  }

  ConvexHingePotential out;
  out.alpha = hull.front().first;
  out.beta = hull.front().second;
  for (size_t m = 1; m < hull.size(); ++m) {
    double b = cross(hull[m - 1], hull[m]);
    double rb = std::round(b);
    if (std::abs(b - rb) > 1e-9) {
      throw std::invalid_argument("max_affine_to_hinge: non-integral breakpoint");
    }
    HingeTerm t;
    t.gamma = hull[m].first - hull[m - 1].first;
    t.delta = -static_cast<int>(rb);
    out.hinges.push_back(t);
  }
  return out;
}

PiecewiseLinearPotential min_of(const std::vector<PiecewiseLinearPotential>& potentials) {
  if (potentials.empty()) throw std::invalid_argument("min_of: empty input");
  std::vector<BoundedLinearPiece> pieces;
  for (const auto& p : potentials) {
    pieces.insert(pieces.end(), p.pieces().begin(), p.pieces().end());
  }
  return PiecewiseLinearPotential(std::move(pieces));
}

PiecewiseLinearPotential truncated_linear(int labels, double tau) {
  const int r = labels - 1;
  return PiecewiseLinearPotential({{-1.0, 0.0, -r, 0}, {1.0, 0.0, 0, r}, {0.0, tau, -r, r}});
}

PiecewiseLinearPotential l1_potential(int labels, double a, double b) {
  const int r = labels - 1;
  if (a == 0.0) return PiecewiseLinearPotential({{0.0, b, -r, r}});
  return PiecewiseLinearPotential({{-a, b, -r, 0}, {a, b, 0, r}});
}

PiecewiseLinearPotential lipschitz_pwl(int bound) {
  return PiecewiseLinearPotential({{0.0, 0.0, -bound, bound}});
}

ConvexHingePotential lipschitz_hinge(int bound) {
  ConvexHingePotential p;
  p.h_lo = -bound;
  p.h_hi = bound;
  return p;
}

}  // namespace cmrf
