#include "cmrf/program.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cmrf {

int StructuredProgram::add_block(BlockKind kind, int dim, double lo, double hi,
                                 int structure, int node) {
  PrimalBlock b;
  b.kind = kind;
  b.offset = primal_dim;
  b.dim = dim;
  b.lo = lo;
  b.hi = hi;
  b.structure = structure;
  b.node = node;
  blocks.push_back(b);
  primal_dim += dim;
  c.resize(primal_dim, 0.0);
  return static_cast<int>(blocks.size()) - 1;
}

int StructuredProgram::begin_row(ProxKind prox, double lo, double hi, int structure) {
  pending_row_ = DualRow{};
  pending_row_.prox = prox;
  pending_row_.lo = lo;
  pending_row_.hi = hi;
  pending_row_.structure = structure;
  open_row_atom_begin_ = static_cast<int>(atoms.size());
  return static_cast<int>(rows.size());
}

void StructuredProgram::atom_var(int var, double coef) {
  Atom a;
  a.kind = AtomKind::Var;
  a.index = var;
  a.coef = coef;
  atoms.push_back(a);
}

void StructuredProgram::atom_prefix(int block, int i, double coef) {
  if (i <= 0) return;
  const int dim = blocks[block].dim;
  if (i >= dim) {
    atom_block_sum(block, 0, 1, dim, coef);
    return;
  }
  Atom a;
  a.kind = AtomKind::Prefix;
  a.index = block;
  a.i0 = i;
  a.coef = coef;
  atoms.push_back(a);
}

void StructuredProgram::atom_block_sum(int block, int start, int stride, int count,
                                       double coef) {
  Atom a;
  a.kind = AtomKind::BlockSum;
  a.index = block;
  a.i0 = start;
  a.stride = stride;
  a.count = count;
  a.coef = coef;
  atoms.push_back(a);
}

int StructuredProgram::end_row() {
  if (static_cast<int>(atoms.size()) == open_row_atom_begin_) {
    open_row_atom_begin_ = -1;
    return -1;
  }
  pending_row_.atom_begin = open_row_atom_begin_;
  pending_row_.atom_end = static_cast<int>(atoms.size());
  rows.push_back(pending_row_);
  open_row_atom_begin_ = -1;
  return static_cast<int>(rows.size()) - 1;
}

void StructuredProgram::add_ball_group(int row_begin, int row_end, double radius,
                                       bool nonneg) {
  balls.push_back({row_begin, row_end, radius, nonneg});
}

void StructuredProgram::finalize() {
  prefix_scratch_off.assign(blocks.size(), -1);
  prefix_blocks.clear();
  for (const auto& a : atoms) {
    if (a.kind == AtomKind::Prefix && prefix_scratch_off[a.index] < 0) {
      prefix_scratch_off[a.index] = 0;  // mark
      prefix_blocks.push_back(a.index);
    }
  }
  std::sort(prefix_blocks.begin(), prefix_blocks.end());
  int off = 0;
  for (int b : prefix_blocks) {
    prefix_scratch_off[b] = off;
    off += blocks[b].dim + 1;
  }
  prefix_scratch_size = off;

  shared_region_end = 0;
  for (const auto& b : blocks) {
    if (b.node >= 0) shared_region_end = std::max(shared_region_end, b.offset + b.dim);
  }
}

const PrimalBlock& StructuredProgram::block_of_var(int var) const {
  // blocks have increasing offsets
  int lo = 0, hi = static_cast<int>(blocks.size()) - 1;
  while (lo < hi) {
    int mid = (lo + hi + 1) / 2;
    if (blocks[mid].offset <= var) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return blocks[lo];
}

double StructuredProgram::objective_coef(int var) const {
  double v = c[var];
  const PrimalBlock& b = block_of_var(var);
  if (b.table >= 0) v += b.scale * tables[b.table][var - b.offset];
  return v;
}

double StructuredProgram::linear_objective(const std::vector<double>& x) const {
  double v = 0.0;
  for (const auto& b : blocks) {
    if (b.table >= 0) {
      const auto& t = tables[b.table];
      double acc = 0.0;
      for (int j = 0; j < b.dim; ++j) acc += t[j] * x[b.offset + j];
      v += b.scale * acc;
    }
  }
  for (int j = 0; j < primal_dim; ++j) v += c[j] * x[j];
  return v;
}

double StructuredProgram::row_value(int r, const std::vector<double>& x) const {
  const DualRow& row = rows[r];
  double v = 0.0;
  for (int a = row.atom_begin; a < row.atom_end; ++a) {
    const Atom& at = atoms[a];
    switch (at.kind) {
      case AtomKind::Var:
        v += at.coef * x[at.index];
        break;
      case AtomKind::Prefix: {
        const PrimalBlock& b = blocks[at.index];
        double acc = 0.0;
        for (int j = 0; j < at.i0; ++j) acc += x[b.offset + j];
        v += at.coef * acc;
        break;
      }
      case AtomKind::BlockSum: {
        const PrimalBlock& b = blocks[at.index];
        double acc = 0.0;
        int idx = b.offset + at.i0;
        for (int j = 0; j < at.count; ++j, idx += at.stride) acc += x[idx];
        v += at.coef * acc;
        break;
      }
    }
  }
  return v;
}

PrimalValue StructuredProgram::primal_value(const std::vector<double>& x) const {
  PrimalValue out;
  out.value = linear_objective(x) + constant;
  std::vector<bool> in_ball(rows.size(), false);
  for (const auto& g : balls) {
    for (int r = g.row_begin; r < g.row_end; ++r) in_ball[r] = true;
  }
  for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
    if (in_ball[r]) continue;
    const DualRow& row = rows[r];
    double v = row_value(r, x);
    switch (row.prox) {
      case ProxKind::Free:
        out.max_eq_violation = std::max(out.max_eq_violation, std::abs(v));
        break;
      case ProxKind::Interval: {
        if (std::isinf(row.hi)) {
          out.max_hard_violation = std::max(out.max_hard_violation, std::max(0.0, v));
        } else {
          out.value += row.hi * std::max(v, 0.0) + row.lo * std::min(v, 0.0);
        }
        break;
      }
      case ProxKind::Ball:
        break;
    }
  }
  for (const auto& g : balls) {
    double sq = 0.0;
    for (int r = g.row_begin; r < g.row_end; ++r) {
      double v = row_value(r, x);
      if (g.nonneg) v = std::max(v, 0.0);
      sq += v * v;
    }
    out.value += g.radius * std::sqrt(sq);
  }
  return out;
}

void StructuredProgram::dump(std::ostream& os) const {
  os << "primal_dim " << primal_dim << " rows " << rows.size() << " balls "
     << balls.size() << " constant " << constant << "\n";
  for (size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    const char* kind = b.kind == BlockKind::Simplex  ? "simplex"
                       : b.kind == BlockKind::NonNeg ? "nonneg"
                                                     : "box";
    os << "block " << i << " " << kind << " off " << b.offset << " dim " << b.dim;
    if (b.node >= 0) os << " node " << b.node;
    os << "\n";
  }
  for (size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    os << "row " << r << " ";
    switch (row.prox) {
      case ProxKind::Free:
        os << "eq0";
        break;
      case ProxKind::Interval:
        os << "[" << row.lo << "," << row.hi << "]";
        break;
      case ProxKind::Ball:
        os << "ball";
        break;
    }
    os << " :";
    for (int a = row.atom_begin; a < row.atom_end; ++a) {
      const Atom& at = atoms[a];
      os << " " << (at.coef >= 0 ? "+" : "") << at.coef;
      switch (at.kind) {
        case AtomKind::Var:
          os << "*x[" << at.index << "]";
          break;
        case AtomKind::Prefix:
          os << "*cum(b" << at.index << "," << at.i0 << ")";
          break;
        case AtomKind::BlockSum:
          os << "*sum(b" << at.index << "," << at.i0 << ",s" << at.stride << ",n"
             << at.count << ")";
          break;
      }
    }
    os << "\n";
  }
  for (const auto& g : balls) {
    os << "ballgroup rows [" << g.row_begin << "," << g.row_end << ") radius "
       << g.radius << (g.nonneg ? " nonneg" : "") << "\n";
  }
}

std::string StructuredProgram::dump_text() const {
  std::ostringstream ss;
  dump(ss);
  return ss.str();
}

}  // namespace cmrf
