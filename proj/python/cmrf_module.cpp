#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cmrf/graphcut.hpp"
#include "cmrf/image.hpp"
#include "cmrf/model.hpp"
#include "cmrf/mplp.hpp"
#include "cmrf/oracle.hpp"
#include "cmrf/pdsolver.hpp"
#include "cmrf/relaxations.hpp"

namespace py = pybind11;
using namespace cmrf;

namespace {

std::vector<double> to_vector(const py::array_t<double>& arr) {
  auto buf = arr.request();
  const double* p = static_cast<const double*>(buf.ptr);
  return std::vector<double>(p, p + buf.size);
}

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), static_cast<double*>(out.request().ptr));
  return out;
}

MrfInstance make_instance(int labels, int nodes,
                          const std::vector<std::pair<int, int>>& edges,
                          const py::array_t<double>& unary,
                          const std::vector<PiecewiseLinearPotential>& potentials,
                          const std::vector<int>& edge_potential,
                          const std::vector<double>& edge_weight) {
  MrfInstance inst;
  inst.labels = labels;
  inst.topology.node_count = nodes;
  for (auto [s, t] : edges) inst.topology.edges.push_back({s, t, EdgeOrientation::None});
  inst.unary = to_vector(unary);
  for (const auto& p : potentials) inst.potentials.emplace_back(p);
  inst.edge_potential = edge_potential;
  inst.edge_weight =
      edge_weight.empty() ? std::vector<double>(edges.size(), 1.0) : edge_weight;
  inst.validate();
  return inst;
}

py::dict solve_program(const StructuredProgram& prog, const MrfInstance& inst,
                       long long max_iters, double tol, int check_every, int threads) {
  SolverConfig cfg;
  cfg.max_iters = max_iters;
  cfg.tol_gap = tol;
  cfg.check_every = check_every;
  cfg.threads = threads;
  auto res = solve(prog, inst, cfg);
  py::dict out;
  out["labels"] = res.best_labeling;
  out["energy"] = res.best_energy;
  out["dual_bound"] = res.best_dual_bound;
  out["gap"] = res.final_gap;
  out["iters"] = res.iters;
  out["converged"] = res.reason == TerminationReason::Tolerance;
  out["trace_csv"] = res.trace.to_csv();
  return out;
}

}  // namespace

PYBIND11_MODULE(_cmrf, m) {
  m.doc() = "compact LP relaxations for MAP inference with piecewise linear priors";

  py::class_<BoundedLinearPiece>(m, "BoundedLinearPiece")
      .def(py::init([](double alpha, double beta, int h_lo, int h_hi) {
             return BoundedLinearPiece{alpha, beta, h_lo, h_hi};
           }),
           py::arg("alpha"), py::arg("beta"), py::arg("h_lo"), py::arg("h_hi"))
      .def_readonly("alpha", &BoundedLinearPiece::alpha)
      .def_readonly("beta", &BoundedLinearPiece::beta)
      .def_readonly("h_lo", &BoundedLinearPiece::h_lo)
      .def_readonly("h_hi", &BoundedLinearPiece::h_hi);

  py::class_<PiecewiseLinearPotential>(m, "PiecewiseLinearPotential")
      .def(py::init<std::vector<BoundedLinearPiece>>())
      .def("evaluate", &PiecewiseLinearPotential::evaluate)
      .def("pieces", &PiecewiseLinearPotential::pieces)
      .def("piece_count", &PiecewiseLinearPotential::piece_count)
      .def("is_min_of_l1", &PiecewiseLinearPotential::is_min_of_l1);

  py::class_<HingeTerm>(m, "HingeTerm")
      .def_readonly("gamma", &HingeTerm::gamma)
      .def_readonly("delta", &HingeTerm::delta);

  py::class_<ConvexHingePotential>(m, "ConvexHingePotential")
      .def(py::init<>())
      .def_readwrite("alpha", &ConvexHingePotential::alpha)
      .def_readwrite("beta", &ConvexHingePotential::beta)
      .def_readwrite("hinges", &ConvexHingePotential::hinges)
      .def_readwrite("h_lo", &ConvexHingePotential::h_lo)
      .def_readwrite("h_hi", &ConvexHingePotential::h_hi)
      .def("evaluate", &ConvexHingePotential::evaluate);

  m.def("from_samples", &from_samples);
  m.def("max_affine_to_hinge", &max_affine_to_hinge);
  m.def("min_of", &min_of);
  m.def("truncated_linear", &truncated_linear);
  m.def("l1_potential", &l1_potential);
  m.def("lipschitz_pwl", &lipschitz_pwl);
  m.def("lipschitz_hinge", &lipschitz_hinge);

  py::class_<MrfInstance>(m, "MrfInstance")
      .def_property_readonly("labels", [](const MrfInstance& i) { return i.labels; })
      .def_property_readonly("nodes", &MrfInstance::node_count)
      .def_property_readonly("edges", &MrfInstance::edge_count)
      .def_property_readonly("unary", [](const MrfInstance& i) { return to_array(i.unary); })
      .def("to_json", &instance_to_json_text);

  m.def("make_instance", &make_instance, py::arg("labels"), py::arg("nodes"),
        py::arg("edges"), py::arg("unary"), py::arg("potentials"),
        py::arg("edge_potential"), py::arg("edge_weight") = std::vector<double>{});
  m.def("gen_random_instance", &gen_random_instance);
  m.def("read_instance", &read_instance);
  m.def("write_instance", &write_instance);
  m.def("instance_from_json", &instance_from_json_text);
  m.def("energy_of_labeling", &energy_of_labeling);
  m.def("round_superlevel",
        [](const py::array_t<double>& x) { return round_superlevel(to_vector(x)); });

  m.def("min_filter", [](const py::array_t<double>& v, int lo, int hi) {
    return to_array(min_filter(to_vector(v), lo, hi));
  });
  m.def("lower_envelope",
        [](const py::array_t<double>& theta, const PiecewiseLinearPotential& p, double w) {
          return to_array(lower_envelope(to_vector(theta), p, w));
        });
  m.def("naive_envelope",
        [](const py::array_t<double>& theta, const PiecewiseLinearPotential& p, double w) {
          return to_array(oracle::naive_envelope(to_vector(theta), p, w));
        });

  py::class_<StructuredProgram>(m, "StructuredProgram")
      .def_property_readonly("primal_dim",
                             [](const StructuredProgram& p) { return p.primal_dim; })
      .def_property_readonly("dual_dim", &StructuredProgram::dual_dim)
      .def("dump", &StructuredProgram::dump_text)
      .def("sizes", [](const StructuredProgram& p) {
        auto rep = count_sizes(p);
        py::dict d;
        d["total_primal"] = rep.total_primal;
        d["total_dual_rows"] = rep.total_dual_rows;
        d["node_primal"] = rep.node_primal;
        d["per_edge_primal"] = rep.per_edge_primal;
        d["per_edge_rows"] = rep.per_edge_rows;
        return d;
      });

  m.def("build_full_lp", &build_full_lp);
  m.def("build_convex_lp", &build_convex_lp);
  m.def("build_compact",
        [](const MrfInstance& inst, const std::string& style) {
          if (style == "auto") return build_compact(inst);
          if (style == "general") return build_compact(inst, CompactStyle::General);
          if (style == "l1_min") return build_compact(inst, CompactStyle::L1Min);
          throw std::invalid_argument("style must be auto|general|l1_min");
        },
        py::arg("inst"), py::arg("style") = "auto");
  m.def("build_compact_isotropic", [](const MrfInstance& inst, const std::string& variant) {
    if (variant == "joint_terms") return build_compact_isotropic(inst, IsoVariant::JointTerms);
    if (variant == "joint_branch") return build_compact_isotropic(inst, IsoVariant::JointBranch);
    throw std::invalid_argument("variant must be joint_terms|joint_branch");
  });

  m.def("solve", &solve_program, py::arg("program"), py::arg("instance"),
        py::arg("max_iters") = 100000, py::arg("tol") = 1e-6, py::arg("check_every") = 250,
        py::arg("threads") = 1);

  m.def("mplp_solve", [](const MrfInstance& inst, int sweeps) {
    auto res = mplp_solve(inst, sweeps);
    py::dict out;
    out["dual_value"] = res.dual_value;
    out["labels"] = res.labeling;
    out["sweeps"] = res.sweeps_run;
    out["dual_per_sweep"] = res.dual_per_sweep;
    return out;
  });

  m.def("graphcut_solve", [](const MrfInstance& inst) {
    auto [labels, energy] = graphcut_solve(inst);
    py::dict out;
    out["labels"] = labels;
    out["energy"] = energy;
    return out;
  });

  m.def("brute_force_map", [](const MrfInstance& inst) {
    auto [labels, energy] = oracle::brute_force_map(inst);
    py::dict out;
    out["labels"] = labels;
    out["energy"] = energy;
    return out;
  });

  m.def("lift_labeling", [](const MrfInstance& inst, const LabelAssignment& a,
                            const StructuredProgram& prog) {
    auto x = lift_labeling(inst, a, prog);
    auto pv = prog.primal_value(x);
    py::dict out;
    out["x"] = to_array(x);
    out["objective"] = pv.value;
    out["max_eq_violation"] = pv.max_eq_violation;
    return out;
  });
}
