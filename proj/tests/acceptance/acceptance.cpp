// Acceptance checks. One line per criterion: "[PASS|FAIL] <n> <name>: <measured>".
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hsns/bl_norms.hpp"
#include "hsns/checkpoint.hpp"
#include "hsns/closed_form.hpp"
#include "hsns/experiment.hpp"
#include "hsns/green_stokes.hpp"
#include "hsns/ns_solver.hpp"
#include "hsns/stokes_semigroup.hpp"

using namespace hsns;

namespace {

// criterion 1
constexpr double kGreenRel = 1e-6;
constexpr double kGreenAbs = 1e-10;
constexpr std::size_t kGreenSamples = 200;
constexpr std::size_t kGreenMinSamples = 100;
// criterion 2
constexpr double kStationaryTol = 1e-3;
constexpr double kStationaryOrder = 2.0;
// criterion 3
constexpr double kBcOrder = 1.5;
// criterion 4
constexpr double kCompositionTol = 1e-3;
// criterion 5
constexpr double kManufacturedOrder = 1.8;
// criterion 6
constexpr double kKatoSlopeLo = 0.35;
constexpr double kKatoSlopeHi = 0.65;
// criterion 7
constexpr double kL2Reduction = 1.5;
// criterion 8
constexpr double kC0Spread = 2.0;
// criterion 10
constexpr double kNoSlipTol = 1e-8;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::shared_ptr<const GradedGrid> grid_for(std::size_t n, double delta) {
  return std::make_shared<const GradedGrid>(build_graded_grid(60.0, n, delta));
}

double l1_total(const SpectralField& w) {
  double s = 0.0;
  for (int a = -w.truncation(); a <= w.truncation(); ++a) s += integrate_abs(w.grid(), w.mode(a));
  return s;
}

double l1_rel_diff(const SpectralField& a, const SpectralField& b) {
  return l1_total(a - b) / l1_total(b);
}

Outcome criterion1() {
  const auto r = cross_validate_green(kGreenSamples, 1, kGreenRel, kGreenAbs);
  Outcome o;
  o.pass = r.disagreements == 0 && r.samples.size() >= kGreenMinSamples && r.n_small_alpha2nu > 0 &&
           r.n_large_alpha2nu > 0;
  o.detail = std::to_string(r.samples.size()) + " points (" + std::to_string(r.n_small_alpha2nu) + " with a^2 nu<=1, " +
             std::to_string(r.n_large_alpha2nu) + " with a^2 nu>=1), disagreements " +
             std::to_string(r.disagreements) + ", max rel quadrature " + fmt("%.2e", r.max_rel_quadrature) +
             ", contour " + fmt("%.2e", r.max_rel_contour);
  return o;
}

double stationary_error(int alpha, double nu, std::size_t n) {
  const auto g = grid_for(n, std::sqrt(nu));
  SpectralField w(g, alpha, true);
  for (std::size_t j = 0; j < g->size(); ++j) w.mode(alpha)[j] = alpha * std::exp(-alpha * g->nodes[j]);
  w.enforce_reality();
  return l1_rel_diff(apply_semigroup(w, nu, 1.0), w);
}

Outcome criterion2() {
  Outcome o{true, ""};
  double worst = 0.0;
  double min_order = 1e300;
  for (double nu : {1e-2, 1e-3}) {
    for (int alpha : {1, 2, 4}) {
      const double e128 = stationary_error(alpha, nu, 128);
      const double e256 = stationary_error(alpha, nu, 256);
      const double e512 = stationary_error(alpha, nu, 512);
      worst = std::max(worst, e512);
      const double order = std::min(std::log2(e128 / e256), std::log2(e256 / e512));
      min_order = std::min(min_order, order);
      if (!(e512 <= kStationaryTol) || !(order >= kStationaryOrder)) o.pass = false;
    }
  }
  o.detail = "max rel L1 error at n=512 " + fmt("%.2e", worst) + ", min observed order " + fmt("%.2f", min_order);
  return o;
}

Outcome criterion3() {
  Outcome o{true, ""};
  // finite-difference flux of the kernel itself
  double min_kernel_order = 1e300;
  for (double nu : {1e-2, 1e-3}) {
    for (int alpha : {0, 1, 4}) {
      const double t = 0.5;
      const double y = 0.3 * std::sqrt(nu);
      std::vector<double> res;
      for (double h : {1e-3, 5e-4, 2.5e-4}) {
        const double hh = h * std::sqrt(nu);
        const double d = (-3.0 * green_function(nu, alpha, t, y, 0.0) + 4.0 * green_function(nu, alpha, t, y, hh) -
                          green_function(nu, alpha, t, y, 2.0 * hh)) /
                         (2.0 * hh);
        res.push_back(std::abs(nu * (d + alpha * green_function(nu, alpha, t, y, 0.0))));
      }
      for (std::size_t i = 1; i < res.size(); ++i) min_kernel_order = std::min(min_kernel_order, std::log2(res[i - 1] / res[i]));
    }
  }
  // evolved solutions on refined grids
  double min_field_order = 1e300;
  for (double nu : {1e-2, 1e-3}) {
    std::vector<double> res, h0;
    for (std::size_t n : {256, 512, 1024}) {
      const auto g = grid_for(n, std::sqrt(nu));
      const auto w = named_datum("two_mode").sample(g, 2);
      res.push_back(boundary_flux_residual(apply_semigroup(w, nu, 0.5), nu, {}));
      h0.push_back(g->first_cell());
    }
    for (std::size_t i = 1; i < res.size(); ++i) {
      min_field_order = std::min(min_field_order, std::log(res[i - 1] / res[i]) / std::log(h0[i - 1] / h0[i]));
    }
  }
  o.pass = min_kernel_order >= kBcOrder && min_field_order >= kBcOrder;
  o.detail = "min order kernel " + fmt("%.2f", min_kernel_order) + ", evolved fields " + fmt("%.2f", min_field_order);
  return o;
}

Outcome criterion4() {
  const auto corpus = closed_form_corpus();
  const SolverConfig defaults;
  const double nu = defaults.nu;
  std::vector<double> coarse, fine;
  for (std::size_t n : {defaults.n_nodes, 2 * defaults.n_nodes}) {
    const auto g = grid_for(n, std::sqrt(nu));
    for (std::size_t i = 0; i < 5; ++i) {
      const auto w = corpus[i].sample(g, corpus[i].truncation());
      const auto two = apply_semigroup(apply_semigroup(w, nu, 0.3), nu, 0.2);
      const auto one = apply_semigroup(w, nu, 0.5);
      (n == defaults.n_nodes ? coarse : fine).push_back(l1_total(two - one) / l1_total(w));
    }
  }
  Outcome o{true, ""};
  double worst = 0.0;
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    worst = std::max(worst, coarse[i]);
    if (!(coarse[i] <= kCompositionTol) || !(fine[i] < coarse[i])) o.pass = false;
  }
  o.detail = "max rel L1 defect " + fmt("%.2e", worst) + " at n=" + std::to_string(defaults.n_nodes) +
             ", refined max " + fmt("%.2e", *std::max_element(fine.begin(), fine.end()));
  return o;
}

Outcome criterion5() {
  // w = e^{-t} e^{-z} in modes 0 and 1 of the Stokes problem with nu = 1e-2
  const double nu = 1e-2;
  std::vector<double> err;
  for (int lev = 0; lev < 3; ++lev) {
    const std::size_t n = std::size_t{128} << lev;
    const double dt = 0.1 / (1 << lev);
    // fixed reference thickness; doubling n refines the grid with dt
    const auto g = grid_for(n, 0.2);
    auto field = [&](double t, double c0, double c1) {
      SpectralField w(g, 1, true);
      for (std::size_t j = 0; j < n; ++j) {
        const double v = std::exp(-t - g->nodes[j]);
        w.mode(0)[j] = c0 * v;
        w.mode(1)[j] = c1 * v;
      }
      w.enforce_reality();
      return w;
    };
    const ForcingFn f = [&](double t) { return field(t, -1.0 - nu, -1.0); };
    const TraceFn gb = [&](double t) { return std::vector<cd>{0.0, -nu * std::exp(-t), 0.0}; };
    const auto tr = duhamel_solve_stokes(field(0.0, 1.0, 1.0), f, gb, nu, DuhamelSchedule::uniform(1.0, dt));
    const auto exact = field(1.0, 1.0, 1.0);
    double e = 0.0;
    for (int a = -1; a <= 1; ++a) {
      Profile d(n);
      for (std::size_t j = 0; j < n; ++j) d[j] = tr.fields.back().mode(a)[j] - exact.mode(a)[j];
      e = std::max(e, integrate_abs(*g, d));
    }
    err.push_back(e);
  }
  const double o1 = std::log2(err[0] / err[1]);
  const double o2 = std::log2(err[1] / err[2]);
  Outcome o;
  o.pass = o1 >= kManufacturedOrder && o2 >= kManufacturedOrder;
  o.detail = "L1 errors " + fmt("%.3e", err[0]) + ", " + fmt("%.3e", err[1]) + ", " + fmt("%.3e", err[2]) +
             "; orders " + fmt("%.2f", o1) + ", " + fmt("%.2f", o2);
  return o;
}

ExperimentConfig sweep_config() {
  ExperimentConfig cfg;
  cfg.command = CommandKind::sweep_inviscid;
  cfg.nu_list = default_nu_ladder();
  cfg.datum = "wall_mode";
  cfg.solver.K = 4;
  cfg.solver.n_nodes = 256;
  cfg.solver.T = 1.0;
  cfg.solver.dt = 0.05;
  cfg.solver.picard_tol = 1e-9;
  cfg.jobs = 5;
  return cfg;
}

Outcome criterion6(const SweepTable& t) {
  Outcome o;
  o.pass = t.complete && t.rows.size() == 5 && t.kato_slope >= kKatoSlopeLo && t.kato_slope <= kKatoSlopeHi;
  o.detail = "log-log slope " + fmt("%.3f", t.kato_slope) + " (window [" + fmt("%.2f", kKatoSlopeLo) + ", " +
             fmt("%.2f", kKatoSlopeHi) + "])";
  if (!t.complete) o.detail += "; sweep incomplete: " + t.failure;
  return o;
}

Outcome criterion7(const SweepTable& t) {
  Outcome o{t.complete && t.rows.size() == 5, ""};
  std::string red;
  for (std::size_t i = 0; i < t.l2_reduction.size(); ++i) {
    if (!(t.l2_reduction[i] > 1.0)) o.pass = false;
    red += (i ? ", " : "") + fmt("%.3f", t.l2_reduction[i]);
  }
  // factor-4 pairs of the ladder: (4e-4, 1e-4) and (4e-5, 1e-5)
  std::string pairs;
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    const double q = t.rows[i - 1].nu / t.rows[i].nu;
    if (std::abs(q - 4.0) > 1e-9) continue;
    const double r = t.rows[i - 1].sup_l2 / t.rows[i].sup_l2;
    if (!(r >= kL2Reduction)) o.pass = false;
    pairs += (pairs.empty() ? "" : ", ") + fmt("%.3f", r);
  }
  o.detail = "consecutive reductions [" + red + "], factor-4 reductions [" + pairs + "]";
  if (!t.complete) o.detail += "; sweep incomplete: " + t.failure;
  return o;
}

Outcome criterion8(const SweepTable& t) {
  // sup_t C0(t) for each member of the sweep, fitted in physical space
  Outcome o{t.complete && !t.rows.empty(), ""};
  double lo = 1e300, hi = 0.0;
  for (const auto& r : t.rows) {
    if (!std::isfinite(r.max_c0) || !(r.max_c0 > 0.0)) o.pass = false;
    lo = std::min(lo, r.max_c0);
    hi = std::max(hi, r.max_c0);
  }
  if (!(hi < kC0Spread * lo)) o.pass = false;
  o.detail = "sup_t C0 ranges over [" + fmt("%.4g", lo) + ", " + fmt("%.4g", hi) + "], spread " + fmt("%.3f", hi / lo);
  if (!t.complete) o.detail += "; sweep incomplete: " + t.failure;
  return o;
}

Outcome criterion9() {
  const auto corpus = closed_form_corpus();
  const auto r = verify_norm_lemmas(corpus);
  Outcome o{corpus.size() == 20, ""};
  const auto& product = r.get("product");
  const auto& emb = r.get("embedding_pointwise");
  if (!(product.max_ratio <= 1.0) || !(product.refined_max_ratio <= 1.0)) o.pass = false;
  if (!(emb.max_ratio <= 1.0 + 1e-12)) o.pass = false;
  double worst_change = 0.0;
  for (const char* name : {"derivative_loss_x", "derivative_loss_z", "elliptic_sup", "elliptic_grad_sup", "elliptic_grad_l1", "bilinear"}) {
    const auto& c = r.get(name);
    if (!c.finite || !std::isfinite(c.max_ratio)) o.pass = false;
    worst_change = std::max(worst_change, c.refinement_change());
  }
  if (!(worst_change <= 1e-2)) o.pass = false;
  o.detail = "product max ratio " + fmt("%.4f", product.max_ratio) + ", pointwise embedding " + fmt("%.6f", emb.max_ratio) +
             ", derivative-loss and bilinear refinement change " + fmt("%.2e", worst_change) + " on " +
             std::to_string(corpus.size()) + " fields";
  return o;
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome criterion10(const std::filesystem::path& scratch) {
  Outcome o{true, ""};
  std::filesystem::create_directories(scratch);
  // checkpoint roundtrip of a random field
  const auto g = grid_for(96, 0.05);
  SpectralField w(g, 3, true);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> N;
  for (int a = -3; a <= 3; ++a) {
    for (auto& v : w.mode(a)) v = cd(N(rng), N(rng));
  }
  const auto path = scratch / "roundtrip.hsns";
  save_checkpoint(path, w, 1e-3, 0.25);
  const auto back = load_checkpoint(path);
  bool exact = back.K == 3 && back.field.grid().nodes == g->nodes;
  for (int a = -3; a <= 3 && exact; ++a) {
    for (std::size_t j = 0; j < g->size(); ++j) {
      if (std::memcmp(&back.field.mode(a)[j], &w.mode(a)[j], sizeof(cd)) != 0) exact = false;
    }
  }
  if (!exact) o.pass = false;

  // byte-identical reports
  ExperimentConfig cfg;
  cfg.command = CommandKind::simulate_ns;
  cfg.datum = "wall_mode";
  cfg.solver.K = 2;
  cfg.solver.n_nodes = 96;
  cfg.solver.T = 0.1;
  cfg.solver.dt = 0.05;
  cfg.solver.nu = 1e-3;
  cfg.checkpoint_every = 1;
  bool identical = true;
  std::vector<std::string> files;
  for (const char* run : {"a", "b"}) {
    cfg.out_dir = (scratch / run).string();
    files = run_experiment(cfg).files;
  }
  for (const auto& f : files) {
    if (f == "run_meta.json" || f.ends_with(".meta.json")) continue;
    if (read_bytes(scratch / "a" / f) != read_bytes(scratch / "b" / f)) identical = false;
  }
  if (!identical) o.pass = false;

  // shear flow: the nonlinearity vanishes identically
  SolverConfig sc;
  sc.nu = 1e-2;
  sc.K = 4;
  sc.n_nodes = 256;
  sc.T = 0.5;
  sc.dt = 0.05;
  const auto sg = sc.make_grid();
  const auto shear = resolve_datum("shear", sg, sc.K);
  const auto traj = run_navier_stokes(sc, shear);
  double noslip = 0.0;
  for (double v : traj.no_slip_residual) noslip = std::max(noslip, v);
  if (!traj.complete || !(noslip < kNoSlipTol)) o.pass = false;

  o.detail = std::string("checkpoint ") + (exact ? "bit-exact" : "MISMATCH") + ", reports " +
             (identical ? "byte-identical" : "DIFFER") + " over " + std::to_string(files.size()) +
             " files, shear no-slip residual " + fmt("%.2e", noslip);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<int> only;
  std::string scratch = (std::filesystem::temp_directory_path() / "hsns_acceptance").string();
  app.add_option("--only", only, "run only these criteria");
  app.add_option("--scratch", scratch, "directory for temporary outputs");
  CLI11_PARSE(app, argc, argv);

  auto wanted = [&](int n) { return only.empty() || std::find(only.begin(), only.end(), n) != only.end(); };
  int failures = 0;
  auto report = [&](int n, const char* name, const std::function<Outcome()>& fn) {
    if (!wanted(n)) return;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("[%s] %2d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  report(1, "green function triple agreement", criterion1);
  report(2, "stationary mode preservation", criterion2);
  report(3, "boundary condition under refinement", criterion3);
  report(4, "semigroup composition", criterion4);
  report(5, "manufactured Stokes solution", criterion5);

  const auto cfg = sweep_config();
  SweepTable table;
  if (wanted(6) || wanted(7) || wanted(8)) {
    try {
      table = run_sweep(cfg, true);
    } catch (const std::exception& e) {
      table.complete = false;
      table.failure = e.what();
    }
  }
  report(6, "Kato scaling", [&] { return criterion6(table); });
  report(7, "inviscid limit", [&] { return criterion7(table); });
  report(8, "boundary-layer profile constant", [&] { return criterion8(table); });
  report(9, "norm lemma suite", criterion9);
  report(10, "infrastructure", [&] { return criterion10(scratch); });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
