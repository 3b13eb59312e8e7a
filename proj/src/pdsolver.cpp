#include "cmrf/pdsolver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cmrf {

void prox_simplex(double* v, int dim) {
  thread_local std::vector<double> u;
  u.assign(v, v + dim);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (int j = 0; j < dim; ++j) {
    cumsum += u[j];
    double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  for (int j = 0; j < dim; ++j) v[j] = std::max(0.0, v[j] - theta);
}

std::vector<double> prox_simplex(std::vector<double> v) {
  prox_simplex(v.data(), static_cast<int>(v.size()));
  return v;
}

double prox_interval(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

void prox_l2ball(double* v, int dim, double radius) {
  double sq = 0.0;
  for (int j = 0; j < dim; ++j) sq += v[j] * v[j];
  double norm = std::sqrt(sq);
  if (norm > radius) {
    double s = radius / norm;
    for (int j = 0; j < dim; ++j) v[j] *= s;
  }
}

// projection in the metric diag(1/tau): argmin_{x in simplex} sum (x-v)^2 / tau
// (the preconditioned iteration needs this whenever tau varies inside a block)
void prox_simplex_weighted(double* v, const double* tau, int dim) {
  thread_local std::vector<std::pair<double, int>> bp;
  bp.resize(dim);
  for (int j = 0; j < dim; ++j) bp[j] = {v[j] / tau[j], j};
  std::sort(bp.begin(), bp.end(), std::greater<>());
  double sv = 0.0, st = 0.0, theta = 0.0;
  for (int k = 0; k < dim; ++k) {
    sv += v[bp[k].second];
    st += tau[bp[k].second];
    double t = (sv - 1.0) / st;
    if (k == dim - 1 || t >= bp[k + 1].first) {
      theta = t;
      break;
    }
  }
  for (int j = 0; j < dim; ++j) v[j] = std::max(0.0, v[j] - tau[j] * theta);
}

namespace {

constexpr double kFloor = 1e-12;

void resolve_prefix_diff(const StructuredProgram& prog, const std::vector<double>& diff,
                         std::vector<double>& out) {
  for (int b : prog.prefix_blocks) {
    const auto& blk = prog.blocks[b];
    const double* d = diff.data() + prog.prefix_scratch_off[b];
    double run = 0.0;
    for (int j = 0; j < blk.dim; ++j) {
      run += d[j];
      out[blk.offset + j] += run;
    }
  }
}

}  // namespace

Preconditioners compute_preconditioners(const StructuredProgram& prog) {
  Preconditioners pc;
  pc.sigma.assign(prog.rows.size(), 0.0);
  std::vector<double> colsum(prog.primal_dim, 0.0);
  std::vector<double> diff(prog.prefix_scratch_size, 0.0);

  for (size_t r = 0; r < prog.rows.size(); ++r) {
    const DualRow& row = prog.rows[r];
    double rs = 0.0;
    for (int a = row.atom_begin; a < row.atom_end; ++a) {
      const Atom& at = prog.atoms[a];
      const double ac = std::abs(at.coef);
      switch (at.kind) {
        case AtomKind::Var:
          rs += ac;
          colsum[at.index] += ac;
          break;
        case AtomKind::Prefix: {
          rs += ac * at.i0;
          double* d = diff.data() + prog.prefix_scratch_off[at.index];
          d[0] += ac;
          d[at.i0] -= ac;
          break;
        }
        case AtomKind::BlockSum: {
          rs += ac * at.count;
          const auto& blk = prog.blocks[at.index];
          int idx = blk.offset + at.i0;
          for (int j = 0; j < at.count; ++j, idx += at.stride) colsum[idx] += ac;
          break;
        }
      }
    }
    if (rs <= 0.0) pc.floored = true;
    pc.sigma[r] = 1.0 / std::max(rs, kFloor);
  }
  resolve_prefix_diff(prog, diff, colsum);
  pc.tau.resize(prog.primal_dim);
  for (int j = 0; j < prog.primal_dim; ++j) {
    if (colsum[j] <= 0.0) pc.floored = true;
    pc.tau[j] = 1.0 / std::max(colsum[j], kFloor);
  }
  return pc;
}

namespace {

void compute_prefix_cums(const StructuredProgram& prog, const double* x,
                         std::vector<double>& cum, int threads) {
  const int nb = static_cast<int>(prog.prefix_blocks.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1 && nb > 64)
#endif
  for (int bi = 0; bi < nb; ++bi) {
    const int b = prog.prefix_blocks[bi];
    const auto& blk = prog.blocks[b];
    double* c = cum.data() + prog.prefix_scratch_off[b];
    const double* xb = x + blk.offset;
    double acc = 0.0;
    c[0] = 0.0;
    for (int j = 0; j < blk.dim; ++j) {
      acc += xb[j];
      c[j + 1] = acc;
    }
  }
  (void)threads;
}

double eval_row(const StructuredProgram& prog, const DualRow& row, const double* x,
                const double* cum) {
  double v = 0.0;
  for (int a = row.atom_begin; a < row.atom_end; ++a) {
    const Atom& at = prog.atoms[a];
    switch (at.kind) {
      case AtomKind::Var:
        v += at.coef * x[at.index];
        break;
      case AtomKind::Prefix:
        v += at.coef * cum[prog.prefix_scratch_off[at.index] + at.i0];
        break;
      case AtomKind::BlockSum: {
        const auto& blk = prog.blocks[at.index];
        const double* xb = x + blk.offset + at.i0;
        double acc = 0.0;
        if (at.stride == 1) {
          for (int j = 0; j < at.count; ++j) acc += xb[j];
        } else {
          for (int j = 0; j < at.count; ++j) acc += xb[static_cast<long long>(j) * at.stride];
        }
        v += at.coef * acc;
        break;
      }
    }
  }
  return v;
}

}  // namespace

void apply_forward(const StructuredProgram& prog, const std::vector<double>& x,
                   std::vector<double>& out) {
  if (static_cast<int>(x.size()) != prog.primal_dim) {
    throw std::invalid_argument("apply_forward: dimension mismatch");
  }
  out.assign(prog.rows.size(), 0.0);
  std::vector<double> cum(prog.prefix_scratch_size);
  compute_prefix_cums(prog, x.data(), cum, 1);
  for (size_t r = 0; r < prog.rows.size(); ++r) {
    out[r] = eval_row(prog, prog.rows[r], x.data(), cum.data());
  }
}

void apply_adjoint(const StructuredProgram& prog, const std::vector<double>& p,
                   std::vector<double>& out) {
  if (p.size() != prog.rows.size()) {
    throw std::invalid_argument("apply_adjoint: dimension mismatch");
  }
  out.assign(prog.primal_dim, 0.0);
  std::vector<double> diff(prog.prefix_scratch_size, 0.0);
  for (size_t r = 0; r < prog.rows.size(); ++r) {
    const DualRow& row = prog.rows[r];
    const double pv = p[r];
    if (pv == 0.0) continue;
    for (int a = row.atom_begin; a < row.atom_end; ++a) {
      const Atom& at = prog.atoms[a];
      const double w = at.coef * pv;
      switch (at.kind) {
        case AtomKind::Var:
          out[at.index] += w;
          break;
        case AtomKind::Prefix: {
          double* d = diff.data() + prog.prefix_scratch_off[at.index];
          d[0] += w;
          d[at.i0] -= w;
          break;
        }
        case AtomKind::BlockSum: {
          const auto& blk = prog.blocks[at.index];
          int idx = blk.offset + at.i0;
          for (int j = 0; j < at.count; ++j, idx += at.stride) out[idx] += w;
          break;
        }
      }
    }
  }
  resolve_prefix_diff(prog, diff, out);
}

double dual_bound(const StructuredProgram& prog, const std::vector<double>& p) {
  std::vector<double> q;
  apply_adjoint(prog, p, q);
  double g = prog.constant;
  for (const auto& blk : prog.blocks) {
    const double* t = blk.table >= 0 ? prog.tables[blk.table].data() : nullptr;
    switch (blk.kind) {
      case BlockKind::Simplex: {
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < blk.dim; ++j) {
          double qi = q[blk.offset + j] + prog.c[blk.offset + j];
          if (t) qi += blk.scale * t[j];
          best = std::min(best, qi);
        }
        g += best;
        break;
      }
      case BlockKind::Box: {
        double acc = 0.0;
        for (int j = 0; j < blk.dim; ++j) {
          double qi = q[blk.offset + j] + prog.c[blk.offset + j];
          if (t) qi += blk.scale * t[j];
          acc += std::min(qi * blk.lo, qi * blk.hi);
        }
        g += acc;
        break;
      }
      case BlockKind::NonNeg: {
        for (int j = 0; j < blk.dim; ++j) {
          double qi = q[blk.offset + j] + prog.c[blk.offset + j];
          if (t) qi += blk.scale * t[j];
          if (qi < 0.0) return -std::numeric_limits<double>::infinity();
        }
        break;
      }
    }
  }
  return g;
}

std::string EnergyTrace::to_csv() const {
  std::ostringstream ss;
  ss << "iter,primal_energy,dual_bound,gap\n";
  ss.precision(12);
  for (const auto& t : points) {
    ss << t.iter << "," << t.primal_energy << "," << t.dual_bound << "," << t.gap << "\n";
  }
  return ss.str();
}

namespace {

class Engine {
 public:
  Engine(const StructuredProgram& prog, const MrfInstance& inst, const SolverConfig& cfg)
      : prog_(prog), inst_(inst), cfg_(cfg) {
#ifdef _OPENMP
    threads_ = std::max(1, cfg.threads);
#else
    threads_ = 1;
#endif
    auto pc = compute_preconditioners(prog);
    tau_ = std::move(pc.tau);
    sigma_ = std::move(pc.sigma);
    floored_ = pc.floored;
    // ball groups are projected radially, which needs one step size per group
    for (const auto& g : prog.balls) {
      double s = sigma_[g.row_begin];
      for (int r = g.row_begin + 1; r < g.row_end; ++r) s = std::min(s, sigma_[r]);
      for (int r = g.row_begin; r < g.row_end; ++r) sigma_[r] = s;
    }

    x_.assign(prog.primal_dim, 0.0);
    xbar_.assign(prog.primal_dim, 0.0);
    p_.assign(prog.rows.size(), 0.0);
    cum_.assign(prog.prefix_scratch_size, 0.0);
    diff_.assign(prog.prefix_scratch_size, 0.0);
    adj_.assign(prog.primal_dim, 0.0);

    kernel_block_.assign(prog.blocks.size(), 0);
    for (const auto& st : prog.structures) {
      if (st.kind == StructureKind::FullLpEdge) kernel_block_[st.xst_block] = 1;
    }
    // uniform step sizes per block let the kernels skip the tau array
    block_tau_.assign(prog.blocks.size(), std::numeric_limits<double>::quiet_NaN());
    for (size_t b = 0; b < prog.blocks.size(); ++b) {
      const auto& blk = prog.blocks[b];
      if (blk.dim == 0) continue;
      double t0 = tau_[blk.offset];
      bool uniform = true;
      for (int j = 1; j < blk.dim && uniform; ++j) uniform = tau_[blk.offset + j] == t0;
      if (uniform) block_tau_[b] = t0;
    }
    arena_shared_end_ = 0;
    for (int b : prog.prefix_blocks) {
      if (prog.blocks[b].offset < prog.shared_region_end) {
        arena_shared_end_ = prog.prefix_scratch_off[b] + prog.blocks[b].dim + 1;
      }
    }
    if (threads_ > 1) {
      shared_buf_.assign(threads_, std::vector<double>(prog.shared_region_end, 0.0));
      shared_diff_.assign(threads_, std::vector<double>(arena_shared_end_, 0.0));
    }
  }

  SolveResult run() {
    SolveResult res;
    res.precond_floored = floored_;
    res.best_energy = std::numeric_limits<double>::infinity();
    res.best_dual_bound = -std::numeric_limits<double>::infinity();
    res.best_labeling.assign(inst_.node_count(), 0);

    const double eqtol = std::max(1e-8, std::sqrt(cfg_.tol_gap) * 1e-2);
    long long iter = 0;
    res.reason = TerminationReason::MaxIters;
    while (iter < cfg_.max_iters) {
      ++iter;
      dual_step();
      primal_step();
      if (iter % cfg_.check_every == 0 || iter == cfg_.max_iters) {
        if (!iterate_finite()) {
          res.reason = TerminationReason::NonFinite;
          break;
        }
        LabelAssignment lab(inst_.node_count());
        for (int s = 0; s < inst_.node_count(); ++s) {
          const auto& blk = prog_.blocks[prog_.node_block[s]];
          lab[s] = round_superlevel(x_.data() + blk.offset, blk.dim);
        }
        double energy = energy_of_labeling(inst_, lab);
        if (energy < res.best_energy) {
          res.best_energy = energy;
          res.best_labeling = lab;
        }
        double g = dual_bound(prog_, p_);
        res.best_dual_bound = std::max(res.best_dual_bound, g);
        double gap = (res.best_energy - g) / (1.0 + std::abs(g));
        PrimalValue pv = prog_.primal_value(x_);
        double lp_gap = std::abs(pv.value - g) / (1.0 + std::abs(g));
        res.trace.points.push_back({iter, energy, g, gap});
        res.final_gap = gap;
        res.lp_objective = pv.value;
        res.max_eq_violation = std::max(pv.max_eq_violation, pv.max_hard_violation);
        if (gap <= cfg_.tol_gap ||
            (lp_gap <= cfg_.tol_gap && res.max_eq_violation <= eqtol)) {
          res.reason = TerminationReason::Tolerance;
          break;
        }
      }
    }
    res.iters = iter;
    res.x = std::move(x_);
    res.p = std::move(p_);
    return res;
  }

 private:
  bool iterate_finite() const {
    for (double v : x_) {
      if (!std::isfinite(v)) return false;
    }
    for (double v : p_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  // p += sigma .* K xbar, then the dual prox
  void dual_step() {
    compute_prefix_cums(prog_, xbar_.data(), cum_, threads_);
    const int ns = static_cast<int>(prog_.structures.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads_) if (threads_ > 1)
#endif
    for (int si = 0; si < ns; ++si) {
      const Structure& st = prog_.structures[si];
      if (st.kind == StructureKind::FullLpEdge) {
        forward_kernel(st);
      } else {
        for (int r = st.row_begin; r < st.row_end; ++r) {
          const DualRow& row = prog_.rows[r];
          double v = p_[r] + sigma_[r] * eval_row(prog_, row, xbar_.data(), cum_.data());
          if (row.prox == ProxKind::Interval) v = std::min(std::max(v, row.lo), row.hi);
          p_[r] = v;
        }
      }
    }
    const int ng = static_cast<int>(prog_.balls.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads_) if (threads_ > 1 && ng > 256)
#endif
    for (int gi = 0; gi < ng; ++gi) {
      const BallGroup& g = prog_.balls[gi];
      if (g.nonneg) {
        for (int r = g.row_begin; r < g.row_end; ++r) p_[r] = std::max(0.0, p_[r]);
      }
      prox_l2ball(p_.data() + g.row_begin, g.row_end - g.row_begin, g.radius);
    }
  }

  void forward_kernel(const Structure& st) {
    const auto& xsb = prog_.blocks[st.xs_block];
    const auto& xtb = prog_.blocks[st.xt_block];
    const auto& eb = prog_.blocks[st.xst_block];
    const int L = xsb.dim;
    const double* xe = xbar_.data() + eb.offset;
    thread_local std::vector<double> colacc;
    colacc.assign(L, 0.0);
    for (int i = 0; i < L; ++i) {
      const double* rowp = xe + static_cast<long long>(i) * L;
      double rs = 0.0;
      for (int j = 0; j < L; ++j) {
        double v = rowp[j];
        rs += v;
        colacc[j] += v;
      }
      const int r = st.row_begin + i;
      p_[r] += sigma_[r] * (1.0 * xbar_[xsb.offset + i] + -1.0 * rs);
    }
    for (int j = 0; j < L; ++j) {
      const int r = st.row_begin + L + j;
      p_[r] += sigma_[r] * (1.0 * xbar_[xtb.offset + j] + -1.0 * colacc[j]);
    }
  }

  // x <- prox(x - tau .* (K^T p + c)); xbar <- x_new + theta (x_new - x_old)
  void primal_step() {
    // scatter adjoint contributions of generically handled rows
    for (auto [b, e] : adj_zero_ranges()) std::fill(adj_.begin() + b, adj_.begin() + e, 0.0);
    std::fill(diff_.begin(), diff_.end(), 0.0);
    if (threads_ > 1) {
      for (auto& buf : shared_buf_) std::fill(buf.begin(), buf.end(), 0.0);
      for (auto& buf : shared_diff_) std::fill(buf.begin(), buf.end(), 0.0);
    }
    const int ns = static_cast<int>(prog_.structures.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads_) if (threads_ > 1)
#endif
    for (int si = 0; si < ns; ++si) {
      const Structure& st = prog_.structures[si];
#ifdef _OPENMP
      const int tid = threads_ > 1 ? omp_get_thread_num() : 0;
#else
      const int tid = 0;
#endif
      double* shared = threads_ > 1 ? shared_buf_[tid].data() : adj_.data();
      double* shared_d = threads_ > 1 ? shared_diff_[tid].data() : diff_.data();
      if (st.kind == StructureKind::FullLpEdge) {
        const auto& xsb = prog_.blocks[st.xs_block];
        const auto& xtb = prog_.blocks[st.xt_block];
        const int L = xsb.dim;
        for (int i = 0; i < L; ++i) shared[xsb.offset + i] += p_[st.row_begin + i];
        for (int j = 0; j < L; ++j) shared[xtb.offset + j] += p_[st.row_begin + L + j];
        continue;
      }
      for (int r = st.row_begin; r < st.row_end; ++r) {
        const double pv = p_[r];
        if (pv == 0.0) continue;
        const DualRow& row = prog_.rows[r];
        for (int a = row.atom_begin; a < row.atom_end; ++a) {
          const Atom& at = prog_.atoms[a];
          const double w = at.coef * pv;
          switch (at.kind) {
            case AtomKind::Var:
              if (at.index < prog_.shared_region_end) {
                shared[at.index] += w;
              } else {
                adj_[at.index] += w;
              }
              break;
            case AtomKind::Prefix: {
              const int off = prog_.prefix_scratch_off[at.index];
              double* d = (off < arena_shared_end_ ? shared_d : diff_.data()) + off;
              d[0] += w;
              d[at.i0] -= w;
              break;
            }
            case AtomKind::BlockSum: {
              const auto& blk = prog_.blocks[at.index];
              double* tgt = blk.offset < prog_.shared_region_end ? shared : adj_.data();
              int idx = blk.offset + at.i0;
              for (int j = 0; j < at.count; ++j, idx += at.stride) tgt[idx] += w;
              break;
            }
          }
        }
      }
    }
    if (threads_ > 1) {
      for (const auto& buf : shared_buf_) {
        for (int j = 0; j < prog_.shared_region_end; ++j) adj_[j] += buf[j];
      }
      for (const auto& buf : shared_diff_) {
        for (int j = 0; j < arena_shared_end_; ++j) diff_[j] += buf[j];
      }
    }
    resolve_prefix_diff(prog_, diff_, adj_);

    const double theta = cfg_.overrelax;
    const int nb = static_cast<int>(prog_.blocks.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads_) if (threads_ > 1)
#endif
    for (int b = 0; b < nb; ++b) {
      const auto& blk = prog_.blocks[b];
      if (blk.dim == 0) continue;
      if (kernel_block_[b]) {
        update_kernel_block(b);
        continue;
      }
      const int off = blk.offset;
      const double* t = blk.table >= 0 ? prog_.tables[blk.table].data() : nullptr;
      const double ut = block_tau_[b];
      const bool uniform = !std::isnan(ut);
      thread_local std::vector<double> tmp;
      tmp.resize(blk.dim);
      for (int j = 0; j < blk.dim; ++j) {
        double g = adj_[off + j] + prog_.c[off + j];
        if (t) g += blk.scale * t[j];
        tmp[j] = x_[off + j] - (uniform ? ut : tau_[off + j]) * g;
      }
      switch (blk.kind) {
        case BlockKind::Simplex:
          if (uniform) {
            prox_simplex(tmp.data(), blk.dim);
          } else {
            prox_simplex_weighted(tmp.data(), tau_.data() + off, blk.dim);
          }
          break;
        case BlockKind::NonNeg:
          for (int j = 0; j < blk.dim; ++j) tmp[j] = std::max(0.0, tmp[j]);
          break;
        case BlockKind::Box:
          for (int j = 0; j < blk.dim; ++j) tmp[j] = std::min(std::max(tmp[j], blk.lo), blk.hi);
          break;
      }
      for (int j = 0; j < blk.dim; ++j) {
        double xn = tmp[j];
        xbar_[off + j] = xn + theta * (xn - x_[off + j]);
        x_[off + j] = xn;
      }
    }
  }

  // fused adjoint gather + step + box prox for a dense full-LP edge block
  void update_kernel_block(int b) {
    const auto& blk = prog_.blocks[b];
    const Structure& st = prog_.structures[blk.structure];
    const int L = prog_.blocks[st.xs_block].dim;
    const double* tab = prog_.tables[blk.table].data();
    const double scale = blk.scale;
    const double* ps = p_.data() + st.row_begin;
    const double* pt = ps + L;
    const double ut = block_tau_[b];
    const bool uniform = !std::isnan(ut);
    const double theta = cfg_.overrelax;
    double* xb = x_.data() + blk.offset;
    double* xbb = xbar_.data() + blk.offset;
    const double* taub = tau_.data() + blk.offset;
    for (int i = 0; i < L; ++i) {
      const double mpr = -ps[i];
      const long long base = static_cast<long long>(i) * L;
      for (int j = 0; j < L; ++j) {
        double g = mpr - pt[j] + scale * tab[base + j];
        double xo = xb[base + j];
        double xn = xo - (uniform ? ut : taub[base + j]) * g;
        xn = std::min(std::max(xn, blk.lo), blk.hi);
        xbb[base + j] = xn + theta * (xn - xo);
        xb[base + j] = xn;
      }
    }
  }

  std::vector<std::pair<int, int>>& adj_zero_ranges() {
    if (!adj_ranges_.empty() || adj_ranges_built_) return adj_ranges_;
    adj_ranges_built_ = true;
    if (prog_.shared_region_end > 0) adj_ranges_.push_back({0, prog_.shared_region_end});
    for (const auto& st : prog_.structures) {
      if (st.kind == StructureKind::Nodes || st.kind == StructureKind::FullLpEdge) continue;
      if (st.block_begin == st.block_end) continue;
      int b = prog_.blocks[st.block_begin].offset;
      const auto& last = prog_.blocks[st.block_end - 1];
      int e = last.offset + last.dim;
      if (!adj_ranges_.empty() && adj_ranges_.back().second == b) {
        adj_ranges_.back().second = e;
      } else {
        adj_ranges_.push_back({b, e});
      }
    }
    return adj_ranges_;
  }

  const StructuredProgram& prog_;
  const MrfInstance& inst_;
  SolverConfig cfg_;
  int threads_ = 1;
  bool floored_ = false;
  std::vector<double> x_, xbar_, p_, tau_, sigma_, cum_, diff_, adj_;
  std::vector<char> kernel_block_;
  std::vector<double> block_tau_;
  std::vector<std::pair<int, int>> adj_ranges_;
  bool adj_ranges_built_ = false;
  int arena_shared_end_ = 0;
  std::vector<std::vector<double>> shared_buf_, shared_diff_;
};

}  // namespace

SolveResult solve(const StructuredProgram& prog, const MrfInstance& inst,
                  const SolverConfig& cfg) {
  if (cfg.max_iters < 1) throw std::invalid_argument("solve: max_iters must be >= 1");
  if (cfg.tol_gap <= 0.0) throw std::invalid_argument("solve: tol_gap must be > 0");
  Engine eng(prog, inst, cfg);
  return eng.run();
}

}  // namespace cmrf
