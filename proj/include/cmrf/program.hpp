#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cmrf {

enum class BlockKind : std::uint8_t { Simplex, NonNeg, Box };

// Contiguous group of primal unknowns with a simple constraint set and an
// optional shared objective table (objective entry j = scale * table[j],
// on top of the dense objective vector c).
struct PrimalBlock {
  BlockKind kind = BlockKind::NonNeg;
  int offset = 0;
  int dim = 0;
  double lo = 0.0;
  double hi = 0.0;
  int structure = -1;
  int node = -1;    // >= 0: simplex block of this node
  int table = -1;
  double scale = 1.0;
};

enum class AtomKind : std::uint8_t { Var, Prefix, BlockSum };

// One linear term of a dual row. Var: coef * x[index]. Prefix: coef times
// the cumulative sum of the first i0 entries of block `index` (indices are
// clamped at assembly: <= 0 vanishes, >= dim becomes the block total).
// BlockSum: coef * sum of `count` entries starting at i0 with `stride`.
struct Atom {
  AtomKind kind = AtomKind::Var;
  std::int32_t index = 0;
  std::int32_t i0 = 0;
  std::int32_t stride = 1;
  std::int32_t count = 0;
  double coef = 0.0;
};

// Free rows are equality constraints (value pinned to 0 at feasibility).
// Interval rows realize max_{p in [lo,hi]} p * value: [0,c] is a weighted
// hinge, [-a,a] an absolute value, [0,inf) a one-sided hard constraint.
// Ball rows belong to a BallGroup realizing radius * ||values||_2.
enum class ProxKind : std::uint8_t { Free, Interval, Ball };

struct DualRow {
  std::int32_t atom_begin = 0;
  std::int32_t atom_end = 0;
  ProxKind prox = ProxKind::Free;
  double lo = 0.0;
  double hi = 0.0;
  std::int32_t structure = -1;
};

struct BallGroup {
  std::int32_t row_begin = 0;
  std::int32_t row_end = 0;
  double radius = 0.0;
  bool nonneg = false;  // clamp dual to >= 0 before radial scaling
};

// FullLpEdge structures carry the dense L x L edge marginals of the
// standard relaxation and get specialized operator kernels in the solver;
// everything else goes through the generic atom path.
enum class StructureKind : std::uint8_t { Nodes, GenericEdge, FullLpEdge, Pixel };

struct Structure {
  StructureKind kind = StructureKind::GenericEdge;
  int entity = -1;  // edge or pixel index
  int block_begin = 0, block_end = 0;
  int row_begin = 0, row_end = 0;
  // FullLpEdge: node blocks and the marginal block. Pixel structures reuse
  // xs/xt/xst as the first block id of each direction group (-1 if absent).
  int xs_block = -1, xt_block = -1, xst_block = -1;
  int aux = -1;  // sparse variable map id for full-LP edges with forbidden pairs
};

enum class ProgramKind : std::uint8_t {
  FullLp,
  ConvexLp,
  CompactGeneral,
  CompactL1,
  IsoJointTerms,
  IsoJointBranch,
};

struct PrimalValue {
  double value = 0.0;
  double max_eq_violation = 0.0;    // residual of Free rows
  double max_hard_violation = 0.0;  // positive part of one-sided rows
};

class StructuredProgram {
 public:
  std::vector<PrimalBlock> blocks;
  std::vector<Atom> atoms;
  std::vector<DualRow> rows;
  std::vector<BallGroup> balls;
  std::vector<Structure> structures;
  std::vector<std::vector<double>> tables;
  std::vector<std::vector<int>> sparse_maps;  // (i*L+j) -> flat var or -1
  std::vector<double> c;
  double constant = 0.0;
  int primal_dim = 0;
  int labels = 0;
  ProgramKind kind = ProgramKind::FullLp;
  std::vector<int> node_block;

  // derived by finalize()
  std::vector<int> prefix_blocks;        // blocks referenced by Prefix atoms
  std::vector<int> prefix_scratch_off;   // arena offset per block id, -1 if unused
  int prefix_scratch_size = 0;
  int shared_region_end = 0;             // [0, end) holds all node blocks

  int dual_dim() const { return static_cast<int>(rows.size()); }

  int add_block(BlockKind kind, int dim, double lo, double hi, int structure,
                int node = -1);
  int begin_row(ProxKind prox, double lo, double hi, int structure);
  void atom_var(int var, double coef);
  // prefix index clamped: i <= 0 dropped, i >= dim becomes a full block sum
  void atom_prefix(int block, int i, double coef);
  void atom_block_sum(int block, int start, int stride, int count, double coef);
  int end_row();  // returns row id; drops the row if it has no atoms (-1)
  void add_ball_group(int row_begin, int row_end, double radius, bool nonneg);

  void finalize();

  // objective entry for variable j (dense c plus table-backed part)
  double objective_coef(int var) const;
  double linear_objective(const std::vector<double>& x) const;

  // full primal functional: linear objective + constant + penalty terms of
  // all Interval/Ball rows; Free-row residuals are reported, not added
  PrimalValue primal_value(const std::vector<double>& x) const;

  double row_value(int r, const std::vector<double>& x) const;

  void dump(std::ostream& os) const;
  std::string dump_text() const;

 private:
  int open_row_atom_begin_ = -1;
  DualRow pending_row_;
  const PrimalBlock& block_of_var(int var) const;
};

}  // namespace cmrf
