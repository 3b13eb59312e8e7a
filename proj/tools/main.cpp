#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmrf/graphcut.hpp"
#include "cmrf/image.hpp"
#include "cmrf/model.hpp"
#include "cmrf/mplp.hpp"
#include "cmrf/oracle.hpp"
#include "cmrf/pdsolver.hpp"
#include "cmrf/relaxations.hpp"
#include "cmrf/rng.hpp"

using namespace cmrf;

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

void write_labels(const std::string& path, const LabelAssignment& labels, double energy) {
  nlohmann::json j;
  j["labels"] = labels;
  j["energy"] = energy;
  write_text(path, j.dump() + "\n");
}

void print_sizes(const StructuredProgram& prog) {
  auto rep = count_sizes(prog);
  std::printf("size: primal=%lld dual_rows=%lld node_primal=%lld\n", rep.total_primal,
              rep.total_dual_rows, rep.node_primal);
  if (!rep.per_edge_primal.empty()) {
    long long mx = *std::max_element(rep.per_edge_primal.begin(), rep.per_edge_primal.end());
    long long mr = *std::max_element(rep.per_edge_rows.begin(), rep.per_edge_rows.end());
    std::printf("size: per-edge primal<=%lld rows<=%lld over %zu edge structures\n", mx, mr,
                rep.per_edge_primal.size());
  }
}

struct SolveFlags {
  std::string method = "compact";
  long long iters = 100000;
  double tol = 1e-6;
  int check_every = 250;
  int threads = 1;
  std::string trace_path;
};

int run_solver_method(const MrfInstance& inst, const SolveFlags& flags,
                      const std::string& out_path) {
  LabelAssignment labels;
  double energy = 0.0;
  bool have_dual = false;
  double dual = 0.0;

  if (flags.method == "brute") {
    std::tie(labels, energy) = oracle::brute_force_map(inst);
  } else if (flags.method == "graphcut") {
    std::tie(labels, energy) = graphcut_solve(inst);
  } else if (flags.method == "mplp") {
    auto res = mplp_solve(inst, static_cast<int>(flags.iters));
    labels = res.labeling;
    energy = energy_of_labeling(inst, labels);
    dual = res.dual_value;
    have_dual = true;
    std::printf("mplp: sweeps=%d dual=%.9g\n", res.sweeps_run, res.dual_value);
  } else {
    StructuredProgram prog;
    if (flags.method == "lp-full") {
      prog = build_full_lp(inst);
    } else if (flags.method == "compact") {
      prog = build_compact(inst);
    } else if (flags.method == "compact-iso") {
      prog = build_compact_isotropic(inst, IsoVariant::JointTerms);
    } else if (flags.method == "compact-iso-b") {
      prog = build_compact_isotropic(inst, IsoVariant::JointBranch);
    } else if (flags.method == "convex-lp") {
      prog = build_convex_lp(inst);
    } else {
      throw std::invalid_argument("unknown method: " + flags.method);
    }
    print_sizes(prog);
    SolverConfig cfg;
    cfg.max_iters = flags.iters;
    cfg.tol_gap = flags.tol;
    cfg.check_every = flags.check_every;
    cfg.threads = flags.threads;
    auto res = solve(prog, inst, cfg);
    labels = res.best_labeling;
    energy = res.best_energy;
    dual = res.best_dual_bound;
    have_dual = true;
    const char* why = res.reason == TerminationReason::Tolerance  ? "tolerance"
                      : res.reason == TerminationReason::MaxIters ? "max_iters"
                                                                  : "non_finite";
    std::printf("solver: iters=%lld stop=%s gap=%.3g\n", res.iters, why, res.final_gap);
    if (!flags.trace_path.empty()) write_text(flags.trace_path, res.trace.to_csv());
    if (res.reason == TerminationReason::NonFinite) {
      std::fprintf(stderr, "solver aborted on a non-finite iterate\n");
      return 1;
    }
  }

  std::printf("energy: %.9g\n", energy);
  if (have_dual) std::printf("dual_bound: %.9g\n", dual);
  if (!out_path.empty()) write_labels(out_path, labels, energy);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compact LP relaxations for MAP inference with piecewise linear priors"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "generate a random grid instance");
  int g_width = 20, g_height = 20, g_labels = 20;
  std::uint64_t g_seed = 1;
  std::string g_out = "instance.json";
  gen->add_option("--width", g_width);
  gen->add_option("--height", g_height);
  gen->add_option("--labels", g_labels);
  gen->add_option("--seed", g_seed);
  gen->add_option("--out", g_out)->required();

  auto* sol = app.add_subcommand("solve", "run a solver on an instance file");
  std::string s_in, s_out, s_method = "compact";
  SolveFlags s_flags;
  sol->add_option("--in", s_in)->required();
  sol->add_option("--method", s_method)
      ->check(CLI::IsMember({"lp-full", "compact", "compact-iso", "compact-iso-b",
                             "convex-lp", "graphcut", "mplp", "brute"}));
  sol->add_option("--iters", s_flags.iters);
  sol->add_option("--tol", s_flags.tol);
  sol->add_option("--check-every", s_flags.check_every);
  sol->add_option("--threads", s_flags.threads);
  sol->add_option("--trace", s_flags.trace_path);
  sol->add_option("--out", s_out);

  auto* early = app.add_subcommand("earlystop", "dual block-coordinate early-stopping study");
  int e_instances = 50, e_width = 20, e_height = 20, e_labels = 20, e_sweeps = 2000;
  long long e_iters = 30000;
  int e_threads = 1;
  std::uint64_t e_seed = 1;
  std::string e_out = "earlystop.csv";
  early->add_option("--instances", e_instances);
  early->add_option("--width", e_width);
  early->add_option("--height", e_height);
  early->add_option("--labels", e_labels);
  early->add_option("--sweeps", e_sweeps);
  early->add_option("--iters", e_iters);
  early->add_option("--threads", e_threads);
  early->add_option("--seed", e_seed);
  early->add_option("--out", e_out);

  auto* den = app.add_subcommand("denoise", "piecewise-linear-prior image denoising");
  std::string d_in, d_out = "denoised.pgm", d_trace, d_ref;
  int d_labels = 64;
  double d_lambda = 1.0, d_tol = 1e-6;
  long long d_iters = 3000;
  int d_threads = 1, d_check = 100;
  bool d_iso = false;
  den->add_option("--in", d_in)->required();
  den->add_option("--labels", d_labels);
  den->add_option("--lambda", d_lambda);
  den->add_option("--out", d_out);
  den->add_option("--trace", d_trace);
  den->add_option("--iters", d_iters);
  den->add_option("--tol", d_tol);
  den->add_option("--check-every", d_check);
  den->add_option("--threads", d_threads);
  den->add_flag("--iso", d_iso);
  den->add_option("--ref", d_ref, "ground-truth image for a PSNR report");

  auto* cor = app.add_subcommand("corrupt", "apply the outlier+Gaussian noise model");
  std::string c_in, c_out = "noisy.pgm";
  std::uint64_t c_seed = 1;
  double c_frac = 0.05, c_sigma = 10.0;
  cor->add_option("--in", c_in)->required();
  cor->add_option("--out", c_out);
  cor->add_option("--seed", c_seed);
  cor->add_option("--outlier-frac", c_frac);
  cor->add_option("--sigma", c_sigma);

  auto* bench = app.add_subcommand("bench-envelope", "time the O(KL) envelope vs the naive scan");
  std::vector<int> b_labels = {64, 128, 256};
  int b_pieces = 3, b_reps = 50;
  std::string b_out;
  bench->add_option("--labels", b_labels);
  bench->add_option("--pieces", b_pieces);
  bench->add_option("--reps", b_reps);
  bench->add_option("--out", b_out);

  auto* ps = app.add_subcommand("psnr", "peak signal-to-noise ratio of two images");
  std::string p_a, p_b;
  ps->add_option("--a", p_a)->required();
  ps->add_option("--b", p_b)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      auto inst = gen_random_instance(g_width, g_height, g_labels, g_seed);
      write_instance(inst, g_out);
      std::printf("wrote %s: %d nodes, %d edges, %d labels\n", g_out.c_str(),
                  inst.node_count(), inst.edge_count(), inst.labels);
      return 0;
    }
    if (sol->parsed()) {
      s_flags.method = s_method;
      auto inst = read_instance(s_in);
      return run_solver_method(inst, s_flags, s_out);
    }
    if (early->parsed()) {
      std::string csv = "seed,gap\n";
      std::vector<double> gaps;
      for (int k = 0; k < e_instances; ++k) {
        std::uint64_t seed = e_seed + static_cast<std::uint64_t>(k);
        auto inst = gen_random_instance(e_width, e_height, e_labels, seed);
        auto mres = mplp_solve(inst, e_sweeps);
        auto prog = build_compact(inst);
        SolverConfig cfg;
        cfg.max_iters = e_iters;
        cfg.tol_gap = 1e-6;
        cfg.check_every = 500;
        cfg.threads = e_threads;
        auto lres = solve(prog, inst, cfg);
        double gap = std::max(0.0, lres.best_dual_bound - mres.dual_value);
        gaps.push_back(gap);
        csv += std::to_string(seed) + "," + std::to_string(gap) + "\n";
        std::printf("seed %llu: mplp=%.6f lp=%.6f gap=%.6f\n",
                    static_cast<unsigned long long>(seed), mres.dual_value,
                    lres.best_dual_bound, gap);
      }
      double over3 = 0, over2 = 0;
      std::string hist = "gap_bucket,count\n";
      const double buckets[] = {0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};
      for (int b = 0; b < 6; ++b) {
        double lo = buckets[b];
        double hi = b + 1 < 6 ? buckets[b + 1] : kInfEnergy;
        int count = 0;
        for (double g : gaps) {
          if (g >= lo && g < hi) ++count;
        }
        hist += std::to_string(lo) + "," + std::to_string(count) + "\n";
      }
      for (double g : gaps) {
        if (g > 0.001) over3 += 1;
        if (g > 0.01) over2 += 1;
      }
      over3 /= static_cast<double>(gaps.size());
      over2 /= static_cast<double>(gaps.size());
      std::printf("fraction gap>0.001: %.3f\nfraction gap>0.01: %.3f\n", over3, over2);
      write_text(e_out, csv);
      write_text(e_out + ".hist.csv", hist);
      return 0;
    }
    if (den->parsed()) {
      auto img = read_pgm(d_in);
      DenoiseParams params;
      params.labels = d_labels;
      params.lambda = d_lambda;
      auto inst = build_denoise_instance(img, params);
      auto prog = d_iso ? build_compact_isotropic(inst, IsoVariant::JointTerms)
                        : build_compact(inst);
      print_sizes(prog);
      SolverConfig cfg;
      cfg.max_iters = d_iters;
      cfg.tol_gap = d_tol;
      cfg.check_every = d_check;
      cfg.threads = d_threads;
      auto res = solve(prog, inst, cfg);
      auto out = labels_to_image(res.best_labeling, img.width, img.height, d_labels,
                                 img.maxval);
      write_pgm(out, d_out);
      std::printf("energy: %.9g (noisy input labeling: %.9g)\n", res.best_energy,
                  energy_of_labeling(inst, image_to_labels(img, d_labels)));
      if (!d_trace.empty()) write_text(d_trace, res.trace.to_csv());
      if (!d_ref.empty()) std::printf("psnr: %.4f dB\n", psnr(read_pgm(d_ref), out));
      return 0;
    }
    if (cor->parsed()) {
      write_pgm(corrupt_image(read_pgm(c_in), c_seed, c_frac, c_sigma), c_out);
      return 0;
    }
    if (bench->parsed()) {
      std::string csv = "labels,pieces,reps,envelope_us,naive_us\n";
      SplitMix64 rng(1);
      for (int L : b_labels) {
        std::vector<BoundedLinearPiece> pieces;
        for (int k = 0; k < b_pieces; ++k) {
          int lo = -(L - 1) + static_cast<int>(rng.next_below(L));
          int hi = lo + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(L)));
          pieces.push_back({rng.uniform(-1, 1), rng.uniform(0, 2), lo, std::min(hi, L - 1)});
        }
        PiecewiseLinearPotential pot(pieces);
        std::vector<double> theta(L);
        double fast_us = 0, naive_us = 0;
        for (int rep = 0; rep < b_reps; ++rep) {
          for (auto& t : theta) t = rng.uniform(0, 5);
          auto t0 = std::chrono::steady_clock::now();
          auto a = lower_envelope(theta, pot, 1.0);
          auto t1 = std::chrono::steady_clock::now();
          auto b = oracle::naive_envelope(theta, pot, 1.0);
          auto t2 = std::chrono::steady_clock::now();
          fast_us += std::chrono::duration<double, std::micro>(t1 - t0).count();
          naive_us += std::chrono::duration<double, std::micro>(t2 - t1).count();
          for (int i = 0; i < L; ++i) {
            bool equal = a[i] == b[i] || (std::isinf(a[i]) && std::isinf(b[i]));
            if (!equal) {
              std::fprintf(stderr, "envelope mismatch at L=%d i=%d\n", L, i);
              return 1;
            }
          }
        }
        fast_us /= b_reps;
        naive_us /= b_reps;
        std::printf("L=%d K=%d envelope=%.2fus naive=%.2fus\n", L, b_pieces, fast_us, naive_us);
        csv += std::to_string(L) + "," + std::to_string(b_pieces) + "," +
               std::to_string(b_reps) + "," + std::to_string(fast_us) + "," +
               std::to_string(naive_us) + "\n";
      }
      if (!b_out.empty()) write_text(b_out, csv);
      return 0;
    }
    if (ps->parsed()) {
      std::printf("psnr: %.4f dB\n", psnr(read_pgm(p_a), read_pgm(p_b)));
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
