#include "cmrf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cmrf/relaxations.hpp"
#include "cmrf/rng.hpp"

namespace cmrf::oracle {

std::pair<LabelAssignment, double> brute_force_map(const MrfInstance& inst) {
  inst.validate();
  const int N = inst.node_count();
  const int L = inst.labels;
  double space = 1.0;
  for (int s = 0; s < N; ++s) {
    space *= L;
    if (space > 1e7) throw std::invalid_argument("brute_force_map: search space exceeds 1e7");
  }
  LabelAssignment cur(N, 0);
  LabelAssignment best = cur;
  double best_energy = energy_of_labeling(inst, cur);
  while (true) {
    int pos = N - 1;
    while (pos >= 0 && cur[pos] == L - 1) {
      cur[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++cur[pos];
    double e = energy_of_labeling(inst, cur);
    if (e < best_energy) {
      best_energy = e;
      best = cur;
    }
  }
  return {best, best_energy};
}

std::vector<double> naive_envelope(const std::vector<double>& theta_t,
                                   const PiecewiseLinearPotential& p, double w) {
  const int L = static_cast<int>(theta_t.size());
  std::vector<double> out(L, kInfEnergy);
  for (int i = 0; i < L; ++i) {
    for (const auto& piece : p.pieces()) {
      const double wa = w * piece.alpha;
      const double wb = w * piece.beta;
      const int jlo = std::max(0, i + piece.h_lo);
      const int jhi = std::min(L - 1, i + piece.h_hi);
      double m = kInfEnergy;
      for (int j = jlo; j <= jhi; ++j) m = std::min(m, theta_t[j] + wa * j);
      double cand = m - wa * i + wb;
      if (cand < out[i]) out[i] = cand;
    }
  }
  return out;
}

std::vector<std::vector<double>> dense_operator(const StructuredProgram& prog) {
  std::vector<std::vector<double>> K(prog.rows.size(),
                                     std::vector<double>(prog.primal_dim, 0.0));
  for (size_t r = 0; r < prog.rows.size(); ++r) {
    const DualRow& row = prog.rows[r];
    for (int a = row.atom_begin; a < row.atom_end; ++a) {
      const Atom& at = prog.atoms[a];
      switch (at.kind) {
        case AtomKind::Var:
          K[r][at.index] += at.coef;
          break;
        case AtomKind::Prefix: {
          const auto& blk = prog.blocks[at.index];
          for (int j = 0; j < at.i0; ++j) K[r][blk.offset + j] += at.coef;
          break;
        }
        case AtomKind::BlockSum: {
          const auto& blk = prog.blocks[at.index];
          int idx = blk.offset + at.i0;
          for (int j = 0; j < at.count; ++j, idx += at.stride) K[r][idx] += at.coef;
          break;
        }
      }
    }
  }
  return K;
}

std::vector<double> naive_apply(const StructuredProgram& prog,
                                const std::vector<double>& v, bool adjoint) {
  auto K = dense_operator(prog);
  if (!adjoint) {
    if (static_cast<int>(v.size()) != prog.primal_dim) {
      throw std::invalid_argument("naive_apply: dimension mismatch");
    }
    std::vector<double> out(prog.rows.size(), 0.0);
    for (size_t r = 0; r < K.size(); ++r) {
      double acc = 0.0;
      for (int j = 0; j < prog.primal_dim; ++j) acc += K[r][j] * v[j];
      out[r] = acc;
    }
    return out;
  }
  if (v.size() != prog.rows.size()) {
    throw std::invalid_argument("naive_apply: dimension mismatch");
  }
  std::vector<double> out(prog.primal_dim, 0.0);
  for (size_t r = 0; r < K.size(); ++r) {
    for (int j = 0; j < prog.primal_dim; ++j) out[j] += K[r][j] * v[r];
  }
  return out;
}

MrfInstance gen_harness_instance(int width, int height, int labels, int max_pieces,
                                 std::uint64_t seed) {
  SplitMix64 rng(seed);
  const int r = labels - 1;
  auto dyadic = [&](double lo, double hi) {
    return lo + std::floor(rng.next_double() * (hi - lo) * 64.0) / 64.0;
  };

  MrfInstance inst;
  inst.topology = make_grid(width, height);
  inst.labels = labels;
  inst.unary.resize(static_cast<size_t>(inst.node_count()) * labels);
  for (auto& u : inst.unary) u = dyadic(0.0, 2.0);

  const int K = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_pieces)));
  std::vector<BoundedLinearPiece> pieces;
  pieces.push_back({dyadic(-1.0, 1.0), dyadic(0.0, 2.0), -r, r});
  for (int k = 1; k < K; ++k) {
    int lo = -r + static_cast<int>(rng.next_below(2 * r + 1));
    int hi = lo + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(r - lo + r + 1)));
    hi = std::min(hi, r);
    pieces.push_back({dyadic(-1.0, 1.0), dyadic(0.0, 2.0), lo, hi});
  }
  inst.potentials.emplace_back(PiecewiseLinearPotential(std::move(pieces)));
  inst.edge_potential.assign(inst.edge_count(), 0);
  inst.edge_weight.resize(inst.edge_count());
  for (auto& w : inst.edge_weight) w = 0.25 + 0.75 * dyadic(0.0, 1.0);
  return inst;
}

EquivalenceReport equivalence_harness(int seed_count, int width, int height, int labels,
                                      int max_pieces, const SolverConfig& cfg,
                                      std::uint64_t base_seed) {
  EquivalenceReport rep;
  for (int k = 0; k < seed_count; ++k) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(k);
    MrfInstance inst = gen_harness_instance(width, height, labels, max_pieces, seed);
    StructuredProgram full = build_full_lp(inst);
    StructuredProgram compact = build_compact(inst, CompactStyle::General);
    SolveResult rf = solve(full, inst, cfg);
    SolveResult rc = solve(compact, inst, cfg);
    EquivalenceRecord rec;
    rec.seed = seed;
    rec.opt_full = rf.best_dual_bound;
    rec.opt_compact = rc.best_dual_bound;
    rec.rel_diff = std::abs(rec.opt_full - rec.opt_compact) / (1.0 + std::abs(rec.opt_full));
    rec.converged = rf.reason == TerminationReason::Tolerance &&
                    rc.reason == TerminationReason::Tolerance;
    if (!rec.converged) ++rep.nonconverged;
    rep.max_rel_diff = std::max(rep.max_rel_diff, rec.rel_diff);
    rep.records.push_back(rec);
  }
  return rep;
}

std::string EquivalenceReport::to_csv() const {
  std::ostringstream ss;
  ss << "seed,opt_full,opt_compact,rel_diff,converged\n";
  ss.precision(12);
  for (const auto& r : records) {
    ss << r.seed << "," << r.opt_full << "," << r.opt_compact << "," << r.rel_diff << ","
       << (r.converged ? 1 : 0) << "\n";
  }
  return ss.str();
}

}  // namespace cmrf::oracle
