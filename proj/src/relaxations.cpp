#include "cmrf/relaxations.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace cmrf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// nodes become structure 0 with one simplex block per node carrying the
// unary objective
void add_node_blocks(StructuredProgram& prog, const MrfInstance& inst) {
  Structure ns;
  ns.kind = StructureKind::Nodes;
  ns.block_begin = 0;
  ns.block_end = inst.node_count();
  prog.structures.push_back(ns);
  prog.labels = inst.labels;
  prog.node_block.resize(inst.node_count());
  for (int s = 0; s < inst.node_count(); ++s) {
    int b = prog.add_block(BlockKind::Simplex, inst.labels, 0.0, 1.0, 0, s);
    prog.node_block[s] = b;
    for (int i = 0; i < inst.labels; ++i) {
      prog.c[prog.blocks[b].offset + i] = inst.unary_at(s, i);
    }
  }
}

// rows sum_i [P_A^i - P_B^{i+d}]_+ (hard when weight == inf); covers label
// differences h with [h - d]_+ exactly on integral points
void add_upper_diff_rows(StructuredProgram& prog, int block_a, int block_b, int d,
                         double weight, int sid, int labels) {
  for (int i = 1; i <= labels - 1 - d; ++i) {
    prog.begin_row(ProxKind::Interval, 0.0, weight, sid);
    prog.atom_prefix(block_a, i, 1.0);
    prog.atom_prefix(block_b, i + d, -1.0);
    prog.end_row();
  }
}

// rows sum_i [P_B^{i+d} - P_A^i]_+, i.e. [d - h]_+ on integral points
void add_lower_diff_rows(StructuredProgram& prog, int block_a, int block_b, int d,
                         double weight, int sid, int labels) {
  for (int i = std::max(1 - d, 1 - labels); i <= labels - 1; ++i) {
    prog.begin_row(ProxKind::Interval, 0.0, weight, sid);
    prog.atom_prefix(block_b, i + d, 1.0);
    prog.atom_prefix(block_a, i, -1.0);
    prog.end_row();
  }
}

const PiecewiseLinearPotential& pwl_of(const MrfInstance& inst, int e,
                                       const char* who) {
  const auto* p = std::get_if<PiecewiseLinearPotential>(&inst.potential_of(e));
  if (!p) throw std::invalid_argument(std::string(who) + ": edge potential is not piecewise-linear");
  return *p;
}

const ConvexHingePotential& hinge_of(const MrfInstance& inst, int e, const char* who) {
  const auto* p = std::get_if<ConvexHingePotential>(&inst.potential_of(e));
  if (!p) throw std::invalid_argument(std::string(who) + ": edge potential is not convex-hinge");
  return *p;
}

}  // namespace

StructuredProgram build_full_lp(const MrfInstance& inst) {
  inst.validate();
  const int L = inst.labels;
  StructuredProgram prog;
  prog.kind = ProgramKind::FullLp;
  add_node_blocks(prog, inst);

  std::map<int, int> table_cache;
  for (int e = 0; e < inst.edge_count(); ++e) {
    const auto& edge = inst.topology.edges[e];
    const double w = inst.edge_weight[e];
    const int sid = static_cast<int>(prog.structures.size());
    const int xs = prog.node_block[edge.s];
    const int xt = prog.node_block[edge.t];

    std::vector<double> vals(static_cast<size_t>(L) * L);
    bool finite = true;
    for (int i = 0; i < L; ++i) {
      for (int j = 0; j < L; ++j) {
        double v = evaluate_potential(inst.potential_of(e), j - i);
        vals[static_cast<size_t>(i) * L + j] = v;
        if (std::isinf(v)) finite = false;
      }
    }

    Structure st;
    st.entity = e;
    st.block_begin = static_cast<int>(prog.blocks.size());
    st.row_begin = static_cast<int>(prog.rows.size());
    st.xs_block = xs;
    st.xt_block = xt;

    if (finite) {
      st.kind = StructureKind::FullLpEdge;
      int tid;
      auto it = table_cache.find(inst.edge_potential[e]);
      if (it != table_cache.end()) {
        tid = it->second;
      } else {
        tid = static_cast<int>(prog.tables.size());
        prog.tables.push_back(std::move(vals));
        table_cache.emplace(inst.edge_potential[e], tid);
      }
      int xst = prog.add_block(BlockKind::Box, L * L, 0.0, 1.0, sid);
      prog.blocks[xst].table = tid;
      prog.blocks[xst].scale = w;
      st.xst_block = xst;
      for (int i = 0; i < L; ++i) {
        prog.begin_row(ProxKind::Free, 0.0, 0.0, sid);
        prog.atom_var(prog.blocks[xs].offset + i, 1.0);
        prog.atom_block_sum(xst, i * L, 1, L, -1.0);
        prog.end_row();
      }
      for (int j = 0; j < L; ++j) {
        prog.begin_row(ProxKind::Free, 0.0, 0.0, sid);
        prog.atom_var(prog.blocks[xt].offset + j, 1.0);
        prog.atom_block_sum(xst, j, L, L, -1.0);
        prog.end_row();
      }
    } else {
      st.kind = StructureKind::GenericEdge;
      std::vector<int> map(static_cast<size_t>(L) * L, -1);
      int nfinite = 0;
      for (size_t idx = 0; idx < vals.size(); ++idx) {
        if (!std::isinf(vals[idx])) map[idx] = nfinite++;
      }
      if (nfinite == 0) throw std::invalid_argument("build_full_lp: potential forbids every label pair");
      int xst = prog.add_block(BlockKind::Box, nfinite, 0.0, 1.0, sid);
      st.xst_block = xst;
      const int xst_off = prog.blocks[xst].offset;
      for (size_t idx = 0; idx < vals.size(); ++idx) {
        if (map[idx] >= 0) prog.c[xst_off + map[idx]] = w * vals[idx];
      }
      for (int i = 0; i < L; ++i) {
        prog.begin_row(ProxKind::Free, 0.0, 0.0, sid);
        prog.atom_var(prog.blocks[xs].offset + i, 1.0);
        for (int j = 0; j < L; ++j) {
          int v = map[static_cast<size_t>(i) * L + j];
          if (v >= 0) prog.atom_var(xst_off + v, -1.0);
        }
        prog.end_row();
      }
      for (int j = 0; j < L; ++j) {
        prog.begin_row(ProxKind::Free, 0.0, 0.0, sid);
        prog.atom_var(prog.blocks[xt].offset + j, 1.0);
        for (int i = 0; i < L; ++i) {
          int v = map[static_cast<size_t>(i) * L + j];
          if (v >= 0) prog.atom_var(xst_off + v, -1.0);
        }
        prog.end_row();
      }
      st.aux = static_cast<int>(prog.sparse_maps.size());
      prog.sparse_maps.push_back(std::move(map));
    }
    st.block_end = static_cast<int>(prog.blocks.size());
    st.row_end = static_cast<int>(prog.rows.size());
    prog.structures.push_back(st);
  }
  prog.finalize();
  return prog;
}

StructuredProgram build_convex_lp(const MrfInstance& inst) {
  inst.validate();
  const int L = inst.labels;
  StructuredProgram prog;
  prog.kind = ProgramKind::ConvexLp;
  add_node_blocks(prog, inst);

  for (int e = 0; e < inst.edge_count(); ++e) {
    const auto& edge = inst.topology.edges[e];
    const auto& pot = hinge_of(inst, e, "build_convex_lp");
    const double w = inst.edge_weight[e];
    const int sid = static_cast<int>(prog.structures.size());
    const int xs = prog.node_block[edge.s];
    const int xt = prog.node_block[edge.t];

    Structure st;
    st.kind = StructureKind::GenericEdge;
    st.entity = e;
    st.block_begin = st.block_end = static_cast<int>(prog.blocks.size());
    st.row_begin = static_cast<int>(prog.rows.size());
    st.xs_block = xs;
    st.xt_block = xt;

    prog.constant += w * pot.beta;
    const int xs_off = prog.blocks[xs].offset;
    const int xt_off = prog.blocks[xt].offset;
    for (int j = 0; j < L; ++j) {
      double coef = w * pot.alpha * static_cast<double>(L - 1 - j);
      prog.c[xs_off + j] += coef;
      prog.c[xt_off + j] -= coef;
    }
    for (const auto& hterm : pot.hinges) {
      add_upper_diff_rows(prog, xs, xt, -hterm.delta, w * hterm.gamma, sid, L);
    }
    if (pot.bounded_above()) add_upper_diff_rows(prog, xs, xt, pot.h_hi, kInf, sid, L);
    if (pot.bounded_below()) add_lower_diff_rows(prog, xs, xt, pot.h_lo, kInf, sid, L);

    st.row_end = static_cast<int>(prog.rows.size());
    prog.structures.push_back(st);
  }
  prog.finalize();
  return prog;
}

StructuredProgram build_compact(const MrfInstance& inst, CompactStyle style) {
  inst.validate();
  const int L = inst.labels;
  StructuredProgram prog;
  prog.kind = style == CompactStyle::General ? ProgramKind::CompactGeneral
                                             : ProgramKind::CompactL1;
  add_node_blocks(prog, inst);

  for (int e = 0; e < inst.edge_count(); ++e) {
    const auto& edge = inst.topology.edges[e];
    const auto& pot = pwl_of(inst, e, "build_compact");
    const double w = inst.edge_weight[e];
    const int sid = static_cast<int>(prog.structures.size());
    const int xs = prog.node_block[edge.s];
    const int xt = prog.node_block[edge.t];

    Structure st;
    st.kind = StructureKind::GenericEdge;
    st.entity = e;
    st.block_begin = static_cast<int>(prog.blocks.size());
    st.row_begin = static_cast<int>(prog.rows.size());
    st.xs_block = xs;
    st.xt_block = xt;

    struct Branch {
      double alpha, beta;
      int lo, hi;
      bool bounded;
    };
    std::vector<Branch> branches;
    if (style == CompactStyle::General) {
      for (const auto& p : pot.pieces()) {
        branches.push_back({p.alpha, p.beta, p.h_lo, p.h_hi, true});
      }
    } else {
      for (const auto& [a, b] : pot.l1_terms(L)) {
        branches.push_back({a, b, 0, 0, false});
      }
    }
    const int K = static_cast<int>(branches.size());

    std::vector<int> ys(K), yt(K);
    for (int k = 0; k < K; ++k) {
      ys[k] = prog.add_block(BlockKind::Box, L, 0.0, 1.0, sid);
      yt[k] = prog.add_block(BlockKind::Box, L, 0.0, 1.0, sid);
      const int ys_off = prog.blocks[ys[k]].offset;
      const int yt_off = prog.blocks[yt[k]].offset;
      const Branch& br = branches[k];
      for (int j = 0; j < L; ++j) {
        if (style == CompactStyle::General) {
          double lin = br.alpha * static_cast<double>(L - 1 - j);
          prog.c[ys_off + j] = w * (lin + 0.5 * br.beta);
          prog.c[yt_off + j] = w * (-lin + 0.5 * br.beta);
        } else {
          prog.c[ys_off + j] = w * 0.5 * br.beta;
          prog.c[yt_off + j] = w * 0.5 * br.beta;
        }
      }
    }

    for (int i = 0; i < L; ++i) {
      prog.begin_row(ProxKind::Free, 0.0, 0.0, sid);
      prog.atom_var(prog.blocks[xs].offset + i, 1.0);
      for (int k = 0; k < K; ++k) prog.atom_var(prog.blocks[ys[k]].offset + i, -1.0);
      prog.end_row();
    }
    for (int i = 0; i < L; ++i) {
      prog.begin_row(ProxKind::Free, 0.0, 0.0, sid);
      prog.atom_var(prog.blocks[xt].offset + i, 1.0);
      for (int k = 0; k < K; ++k) prog.atom_var(prog.blocks[yt[k]].offset + i, -1.0);
      prog.end_row();
    }
    for (int k = 0; k < K; ++k) {
      prog.begin_row(ProxKind::Free, 0.0, 0.0, sid);
      prog.atom_block_sum(ys[k], 0, 1, L, 1.0);
      prog.atom_block_sum(yt[k], 0, 1, L, -1.0);
      prog.end_row();
    }
    for (int k = 0; k < K; ++k) {
      const Branch& br = branches[k];
      if (style == CompactStyle::General) {
        add_upper_diff_rows(prog, ys[k], yt[k], br.hi, kInf, sid, L);
        add_lower_diff_rows(prog, ys[k], yt[k], br.lo, kInf, sid, L);
      } else if (br.alpha > 0.0) {
        for (int i = 1; i <= L - 1; ++i) {
          prog.begin_row(ProxKind::Interval, -w * br.alpha, w * br.alpha, sid);
          prog.atom_prefix(ys[k], i, 1.0);
          prog.atom_prefix(yt[k], i, -1.0);
          prog.end_row();
        }
      }
    }

    st.block_end = static_cast<int>(prog.blocks.size());
    st.row_end = static_cast<int>(prog.rows.size());
    prog.structures.push_back(st);
  }
  prog.finalize();
  return prog;
}

StructuredProgram build_compact(const MrfInstance& inst) {
  bool l1 = inst.edge_count() > 0;
  for (int e = 0; e < inst.edge_count() && l1; ++e) {
    const auto* p = std::get_if<PiecewiseLinearPotential>(&inst.potential_of(e));
    l1 = p && p->is_min_of_l1(inst.labels);
  }
  return build_compact(inst, l1 ? CompactStyle::L1Min : CompactStyle::General);
}

namespace {

struct IsoSetup {
  bool l1 = false;                            // else flat symmetric pieces
  std::vector<std::pair<double, double>> terms;  // L1: (a_k, b_k)
  std::vector<std::pair<double, int>> flats;     // flat: (b_k, d_k)
  double w = 1.0;
  int width = 0, height = 0;
};

IsoSetup iso_setup(const MrfInstance& inst, const char* who) {
  if (!inst.topology.grid) throw std::invalid_argument(std::string(who) + ": grid metadata required");
  IsoSetup s;
  s.width = inst.topology.grid->width;
  s.height = inst.topology.grid->height;
  if (inst.edge_count() == 0) return s;
  const int pid = inst.edge_potential[0];
  s.w = inst.edge_weight[0];
  for (int e = 0; e < inst.edge_count(); ++e) {
    if (inst.edge_potential[e] != pid || inst.edge_weight[e] != s.w) {
      throw std::invalid_argument(std::string(who) + ": homogeneous potentials and weights required");
    }
  }
  const auto* pwl = std::get_if<PiecewiseLinearPotential>(&inst.potentials[pid]);
  if (!pwl) throw std::invalid_argument(std::string(who) + ": piecewise-linear potential required");
  if (pwl->is_min_of_l1(inst.labels)) {
    s.l1 = true;
    s.terms = pwl->l1_terms(inst.labels);
  } else {
    for (const auto& p : pwl->pieces()) {
      if (p.alpha != 0.0 || p.h_lo != -p.h_hi) {
        throw std::invalid_argument(std::string(who) +
                                    ": potential must be min of L1 terms or of symmetric flat pieces");
      }
      s.flats.emplace_back(p.beta, p.h_hi);
    }
  }
  return s;
}

}  // namespace

StructuredProgram build_compact_isotropic(const MrfInstance& inst, IsoVariant variant) {
  inst.validate();
  const char* who = "build_compact_isotropic";
  IsoSetup setup = iso_setup(inst, who);
  if (variant == IsoVariant::JointBranch && !setup.l1) {
    throw std::invalid_argument(std::string(who) + ": joint_branch requires a minimum of L1 terms");
  }
  const int L = inst.labels;
  const int W = setup.width, H = setup.height;
  const double w = setup.w;
  StructuredProgram prog;
  prog.kind = variant == IsoVariant::JointTerms ? ProgramKind::IsoJointTerms
                                                : ProgramKind::IsoJointBranch;
  add_node_blocks(prog, inst);

  const int K = setup.l1 ? static_cast<int>(setup.terms.size())
                         : static_cast<int>(setup.flats.size());

  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const int s = y * W + x;
      const bool has_h = x + 1 < W;
      const bool has_v = y + 1 < H;
      if (!has_h && !has_v) continue;
      const int sid = static_cast<int>(prog.structures.size());
      Structure st;
      st.kind = StructureKind::Pixel;
      st.entity = s;
      st.block_begin = static_cast<int>(prog.blocks.size());
      st.row_begin = static_cast<int>(prog.rows.size());

      if (variant == IsoVariant::JointTerms) {
        std::vector<int> yhs(K), yht(K), yvs(K), yvt(K);
        if (has_h) {
          st.xs_block = static_cast<int>(prog.blocks.size());
          for (int k = 0; k < K; ++k) {
            yhs[k] = prog.add_block(BlockKind::Box, L, 0.0, 1.0, sid);
            yht[k] = prog.add_block(BlockKind::Box, L, 0.0, 1.0, sid);
          }
        }
        if (has_v) {
          st.xt_block = static_cast<int>(prog.blocks.size());
          for (int k = 0; k < K; ++k) {
            yvs[k] = prog.add_block(BlockKind::Box, L, 0.0, 1.0, sid);
            yvt[k] = prog.add_block(BlockKind::Box, L, 0.0, 1.0, sid);
          }
        }
        auto add_direction_rows = [&](const std::vector<int>& ys, const std::vector<int>& yt,
                                      int other) {
          for (int i = 0; i < L; ++i) {
            prog.begin_row(ProxKind::Free, 0.0, 0.0, sid);
            prog.atom_var(prog.blocks[prog.node_block[s]].offset + i, 1.0);
            for (int k = 0; k < K; ++k) prog.atom_var(prog.blocks[ys[k]].offset + i, -1.0);
            prog.end_row();
          }
          for (int i = 0; i < L; ++i) {
            prog.begin_row(ProxKind::Free, 0.0, 0.0, sid);
            prog.atom_var(prog.blocks[prog.node_block[other]].offset + i, 1.0);
            for (int k = 0; k < K; ++k) prog.atom_var(prog.blocks[yt[k]].offset + i, -1.0);
            prog.end_row();
          }
          for (int k = 0; k < K; ++k) {
            prog.begin_row(ProxKind::Free, 0.0, 0.0, sid);
            prog.atom_block_sum(ys[k], 0, 1, L, 1.0);
            prog.atom_block_sum(yt[k], 0, 1, L, -1.0);
            prog.end_row();
          }
        };
        if (has_h) add_direction_rows(yhs, yht, s + 1);
        if (has_v) add_direction_rows(yvs, yvt, s + W);

        // branch-cost coupling over the two directions
        for (int k = 0; k < K; ++k) {
          double bk = setup.l1 ? setup.terms[k].second : setup.flats[k].first;
          if (bk != 0.0) {
            int rb = static_cast<int>(prog.rows.size());
            if (has_h) {
              prog.begin_row(ProxKind::Ball, 0.0, 0.0, sid);
              prog.atom_block_sum(yhs[k], 0, 1, L, 0.5);
              prog.atom_block_sum(yht[k], 0, 1, L, 0.5);
              prog.end_row();
            }
            if (has_v) {
              prog.begin_row(ProxKind::Ball, 0.0, 0.0, sid);
              prog.atom_block_sum(yvs[k], 0, 1, L, 0.5);
              prog.atom_block_sum(yvt[k], 0, 1, L, 0.5);
              prog.end_row();
            }
            int re = static_cast<int>(prog.rows.size());
            if (re - rb == 2) {
              prog.add_ball_group(rb, re, w * bk, false);
            } else {
              prog.rows[rb].prox = ProxKind::Interval;
              prog.rows[rb].lo = -w * bk;
              prog.rows[rb].hi = w * bk;
            }
          }
        }
        if (setup.l1) {
          for (int k = 0; k < K; ++k) {
            double ak = setup.terms[k].first;
            if (ak == 0.0) continue;
            for (int i = 1; i <= L - 1; ++i) {
              int rb = static_cast<int>(prog.rows.size());
              if (has_h) {
                prog.begin_row(ProxKind::Ball, 0.0, 0.0, sid);
                prog.atom_prefix(yhs[k], i, 1.0);
                prog.atom_prefix(yht[k], i, -1.0);
                prog.end_row();
              }
              if (has_v) {
                prog.begin_row(ProxKind::Ball, 0.0, 0.0, sid);
                prog.atom_prefix(yvs[k], i, 1.0);
                prog.atom_prefix(yvt[k], i, -1.0);
                prog.end_row();
              }
              int re = static_cast<int>(prog.rows.size());
              if (re - rb == 2) {
                prog.add_ball_group(rb, re, w * ak, false);
              } else {
                prog.rows[rb].prox = ProxKind::Interval;
                prog.rows[rb].lo = -w * ak;
                prog.rows[rb].hi = w * ak;
              }
            }
          }
        } else {
          for (int k = 0; k < K; ++k) {
            int d = setup.flats[k].second;
            if (has_h) {
              add_upper_diff_rows(prog, yhs[k], yht[k], d, kInf, sid, L);
              add_lower_diff_rows(prog, yhs[k], yht[k], -d, kInf, sid, L);
            }
            if (has_v) {
              add_upper_diff_rows(prog, yvs[k], yvt[k], d, kInf, sid, L);
              add_lower_diff_rows(prog, yvs[k], yvt[k], -d, kInf, sid, L);
            }
          }
        }
      } else {  // JointBranch
        std::vector<int> yss(K), yst(K), ysr(K);
        st.xs_block = static_cast<int>(prog.blocks.size());
        for (int k = 0; k < K; ++k) yss[k] = prog.add_block(BlockKind::Box, L, 0.0, 1.0, sid);
        if (has_h) {
          st.xt_block = static_cast<int>(prog.blocks.size());
          for (int k = 0; k < K; ++k) yst[k] = prog.add_block(BlockKind::Box, L, 0.0, 1.0, sid);
        }
        if (has_v) {
          st.xst_block = static_cast<int>(prog.blocks.size());
          for (int k = 0; k < K; ++k) ysr[k] = prog.add_block(BlockKind::Box, L, 0.0, 1.0, sid);
        }
        for (int k = 0; k < K; ++k) {
          double bk = setup.terms[k].second;
          const int off = prog.blocks[yss[k]].offset;
          for (int j = 0; j < L; ++j) prog.c[off + j] = w * bk;
        }
        auto marg_rows = [&](int node, const std::vector<int>& blocks_k) {
          for (int i = 0; i < L; ++i) {
            prog.begin_row(ProxKind::Free, 0.0, 0.0, sid);
            prog.atom_var(prog.blocks[prog.node_block[node]].offset + i, 1.0);
            for (int k = 0; k < K; ++k) prog.atom_var(prog.blocks[blocks_k[k]].offset + i, -1.0);
            prog.end_row();
          }
        };
        marg_rows(s, yss);
        if (has_h) marg_rows(s + 1, yst);
        if (has_v) marg_rows(s + W, ysr);
        for (int k = 0; k < K; ++k) {
          if (has_h) {
            prog.begin_row(ProxKind::Free, 0.0, 0.0, sid);
            prog.atom_block_sum(yss[k], 0, 1, L, 1.0);
            prog.atom_block_sum(yst[k], 0, 1, L, -1.0);
            prog.end_row();
          }
          if (has_v) {
            prog.begin_row(ProxKind::Free, 0.0, 0.0, sid);
            prog.atom_block_sum(yss[k], 0, 1, L, 1.0);
            prog.atom_block_sum(ysr[k], 0, 1, L, -1.0);
            prog.end_row();
          }
        }
        for (int k = 0; k < K; ++k) {
          double ak = setup.terms[k].first;
          if (ak == 0.0) continue;
          for (int i = 1; i <= L - 1; ++i) {
            int rb = static_cast<int>(prog.rows.size());
            if (has_h) {
              prog.begin_row(ProxKind::Ball, 0.0, 0.0, sid);
              prog.atom_prefix(yss[k], i, 1.0);
              prog.atom_prefix(yst[k], i, -1.0);
              prog.end_row();
            }
            if (has_v) {
              prog.begin_row(ProxKind::Ball, 0.0, 0.0, sid);
              prog.atom_prefix(yss[k], i, 1.0);
              prog.atom_prefix(ysr[k], i, -1.0);
              prog.end_row();
            }
            int re = static_cast<int>(prog.rows.size());
            if (re - rb == 2) {
              prog.add_ball_group(rb, re, w * ak, false);
            } else {
              prog.rows[rb].prox = ProxKind::Interval;
              prog.rows[rb].lo = -w * ak;
              prog.rows[rb].hi = w * ak;
            }
          }
        }
      }

      st.block_end = static_cast<int>(prog.blocks.size());
      st.row_end = static_cast<int>(prog.rows.size());
      prog.structures.push_back(st);
    }
  }
  prog.finalize();
  return prog;
}

SizeReport count_sizes(const StructuredProgram& prog) {
  SizeReport rep;
  rep.total_primal = prog.primal_dim;
  rep.total_dual_rows = static_cast<long long>(prog.rows.size());
  for (const auto& st : prog.structures) {
    long long vars = 0;
    for (int b = st.block_begin; b < st.block_end; ++b) vars += prog.blocks[b].dim;
    if (st.kind == StructureKind::Nodes) {
      rep.node_primal = vars;
    } else {
      rep.per_edge_primal.push_back(vars);
      rep.per_edge_rows.push_back(st.row_end - st.row_begin);
    }
  }
  return rep;
}

namespace {

void set_one_hot(std::vector<double>& x, const StructuredProgram& prog, int block,
                 int label) {
  x[prog.blocks[block].offset + label] = 1.0;
}

int l1_argmin(const std::vector<std::pair<double, double>>& terms, int habs) {
  int best = 0;
  double best_v = kInf;
  for (size_t k = 0; k < terms.size(); ++k) {
    double v = terms[k].first * habs + terms[k].second;
    if (v < best_v) {
      best_v = v;
      best = static_cast<int>(k);
    }
  }
  return best;
}

}  // namespace

std::vector<double> lift_labeling(const MrfInstance& inst, const LabelAssignment& a,
                                  const StructuredProgram& prog) {
  if (static_cast<int>(a.size()) != inst.node_count()) {
    throw std::invalid_argument("lift_labeling: labeling size mismatch");
  }
  const int L = inst.labels;
  std::vector<double> x(prog.primal_dim, 0.0);
  for (int s = 0; s < inst.node_count(); ++s) {
    if (a[s] < 0 || a[s] >= L) throw std::invalid_argument("lift_labeling: label out of range");
    set_one_hot(x, prog, prog.node_block[s], a[s]);
  }

  const bool is_iso = prog.kind == ProgramKind::IsoJointTerms ||
                      prog.kind == ProgramKind::IsoJointBranch;
  IsoSetup iso;
  if (is_iso) iso = iso_setup(inst, "lift_labeling");

  for (const auto& st : prog.structures) {
    if (st.kind == StructureKind::Nodes) continue;
    if (prog.kind == ProgramKind::FullLp) {
      const auto& edge = inst.topology.edges[st.entity];
      const int h = a[edge.t] - a[edge.s];
      if (std::isinf(evaluate_potential(inst.potential_of(st.entity), h))) {
        throw std::invalid_argument("lift_labeling: labeling infeasible under hard constraints");
      }
      const int pair = a[edge.s] * L + a[edge.t];
      if (st.aux >= 0) {
        int v = prog.sparse_maps[st.aux][pair];
        x[prog.blocks[st.xst_block].offset + v] = 1.0;
      } else {
        x[prog.blocks[st.xst_block].offset + pair] = 1.0;
      }
    } else if (prog.kind == ProgramKind::ConvexLp) {
      const int h = a[inst.topology.edges[st.entity].t] - a[inst.topology.edges[st.entity].s];
      if (std::isinf(evaluate_potential(inst.potential_of(st.entity), h))) {
        throw std::invalid_argument("lift_labeling: labeling infeasible under hard constraints");
      }
    } else if (prog.kind == ProgramKind::CompactGeneral ||
               prog.kind == ProgramKind::CompactL1) {
      const auto& edge = inst.topology.edges[st.entity];
      const int h = a[edge.t] - a[edge.s];
      const auto& pot = std::get<PiecewiseLinearPotential>(inst.potential_of(st.entity));
      int k;
      if (prog.kind == ProgramKind::CompactGeneral) {
        k = pot.argmin_piece(h);
        if (k < 0) throw std::invalid_argument("lift_labeling: labeling infeasible under hard constraints");
      } else {
        k = l1_argmin(pot.l1_terms(L), std::abs(h));
      }
      set_one_hot(x, prog, st.block_begin + 2 * k, a[edge.s]);
      set_one_hot(x, prog, st.block_begin + 2 * k + 1, a[edge.t]);
    } else {
      // isotropic pixel structures
      const IsoSetup& setup = iso;
      const int s = st.entity;
      const int W = setup.width;
      const bool has_h = st.kind == StructureKind::Pixel &&
                         (prog.kind == ProgramKind::IsoJointTerms ? st.xs_block >= 0
                                                                  : st.xt_block >= 0);
      const bool has_v = prog.kind == ProgramKind::IsoJointTerms ? st.xt_block >= 0
                                                                 : st.xst_block >= 0;
      auto flat_argmin = [&](int habs) {
        int best = -1;
        double best_v = kInf;
        for (size_t k = 0; k < setup.flats.size(); ++k) {
          if (habs <= setup.flats[k].second && setup.flats[k].first < best_v) {
            best_v = setup.flats[k].first;
            best = static_cast<int>(k);
          }
        }
        if (best < 0) throw std::invalid_argument("lift_labeling: labeling infeasible under hard constraints");
        return best;
      };
      if (prog.kind == ProgramKind::IsoJointTerms) {
        if (has_h) {
          int hh = std::abs(a[s + 1] - a[s]);
          int k = setup.l1 ? l1_argmin(setup.terms, hh) : flat_argmin(hh);
          set_one_hot(x, prog, st.xs_block + 2 * k, a[s]);
          set_one_hot(x, prog, st.xs_block + 2 * k + 1, a[s + 1]);
        }
        if (has_v) {
          int hv = std::abs(a[s + W] - a[s]);
          int k = setup.l1 ? l1_argmin(setup.terms, hv) : flat_argmin(hv);
          set_one_hot(x, prog, st.xt_block + 2 * k, a[s]);
          set_one_hot(x, prog, st.xt_block + 2 * k + 1, a[s + W]);
        }
      } else {
        // one shared branch for both directions
        const int K = static_cast<int>(setup.terms.size());
        int best_k = 0;
        double best_v = kInf;
        for (int k = 0; k < K; ++k) {
          double cost = setup.terms[k].second;
          double norm = 0.0;
          if (has_h && has_v) {
            int lo_h = std::min(a[s], a[s + 1]), hi_h = std::max(a[s], a[s + 1]);
            int lo_v = std::min(a[s], a[s + W]), hi_v = std::max(a[s], a[s + W]);
            for (int i = 1; i <= inst.labels - 1; ++i) {
              bool ih = i > lo_h && i <= hi_h;
              bool iv = i > lo_v && i <= hi_v;
              if (ih && iv) {
                norm += std::sqrt(2.0);
              } else if (ih || iv) {
                norm += 1.0;
              }
            }
          } else if (has_h) {
            norm = std::abs(a[s + 1] - a[s]);
          } else if (has_v) {
            norm = std::abs(a[s + W] - a[s]);
          }
          cost += setup.terms[k].first * norm;
          if (cost < best_v) {
            best_v = cost;
            best_k = k;
          }
        }
        set_one_hot(x, prog, st.xs_block + best_k, a[s]);
        if (has_h) set_one_hot(x, prog, st.xt_block + best_k, a[s + 1]);
        if (has_v) set_one_hot(x, prog, st.xst_block + best_k, a[s + W]);
      }
    }
  }
  return x;
}

double iso_energy_of_labeling(const MrfInstance& inst, const LabelAssignment& a,
                              IsoVariant variant) {
  IsoSetup setup = iso_setup(inst, "iso_energy_of_labeling");
  const int W = setup.width, H = setup.height;
  const double w = setup.w;
  double e = 0.0;
  for (int s = 0; s < inst.node_count(); ++s) e += inst.unary_at(s, a[s]);

  auto coupled_norm = [&](int s, bool has_h, bool has_v) {
    int lo_h = 0, hi_h = 0, lo_v = 0, hi_v = 0;
    if (has_h) {
      lo_h = std::min(a[s], a[s + 1]);
      hi_h = std::max(a[s], a[s + 1]);
    }
    if (has_v) {
      lo_v = std::min(a[s], a[s + W]);
      hi_v = std::max(a[s], a[s + W]);
    }
    double norm = 0.0;
    for (int i = 1; i <= inst.labels - 1; ++i) {
      bool ih = has_h && i > lo_h && i <= hi_h;
      bool iv = has_v && i > lo_v && i <= hi_v;
      if (ih && iv) {
        norm += std::sqrt(2.0);
      } else if (ih || iv) {
        norm += 1.0;
      }
    }
    return norm;
  };

  for (int y = 0; y < H; ++y) {
    for (int x0 = 0; x0 < W; ++x0) {
      const int s = y * W + x0;
      const bool has_h = x0 + 1 < W;
      const bool has_v = y + 1 < H;
      if (!has_h && !has_v) continue;
      if (variant == IsoVariant::JointTerms) {
        int kh = -1, kv = -1;
        double ah = 0, bh = 0, av = 0, bv = 0;
        if (has_h) {
          int hh = std::abs(a[s + 1] - a[s]);
          if (setup.l1) {
            kh = l1_argmin(setup.terms, hh);
            ah = setup.terms[kh].first;
            bh = setup.terms[kh].second;
          } else {
            double best = kInf;
            for (size_t k = 0; k < setup.flats.size(); ++k) {
              if (hh <= setup.flats[k].second && setup.flats[k].first < best) {
                best = setup.flats[k].first;
                kh = static_cast<int>(k);
              }
            }
            if (kh < 0) return kInfEnergy;
            bh = setup.flats[kh].first;
          }
        }
        if (has_v) {
          int hv = std::abs(a[s + W] - a[s]);
          if (setup.l1) {
            kv = l1_argmin(setup.terms, hv);
            av = setup.terms[kv].first;
            bv = setup.terms[kv].second;
          } else {
            double best = kInf;
            for (size_t k = 0; k < setup.flats.size(); ++k) {
              if (hv <= setup.flats[k].second && setup.flats[k].first < best) {
                best = setup.flats[k].first;
                kv = static_cast<int>(k);
              }
            }
            if (kv < 0) return kInfEnergy;
            bv = setup.flats[kv].first;
          }
        }
        if (has_h && has_v && kh == kv) {
          e += w * bh * std::sqrt(2.0);
          e += w * ah * coupled_norm(s, true, true);
        } else {
          if (has_h) e += w * (bh + ah * std::abs(a[s + 1] - a[s]));
          if (has_v) e += w * (bv + av * std::abs(a[s + W] - a[s]));
        }
      } else {
        double best = kInf;
        for (const auto& [ak, bk] : setup.terms) {
          best = std::min(best, bk + ak * coupled_norm(s, has_h, has_v));
        }
        e += w * best;
      }
    }
  }
  return e;
}

}  // namespace cmrf
