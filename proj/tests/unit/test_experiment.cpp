#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>

#include "doctest.h"

#include "hsns/checkpoint.hpp"
#include "hsns/closed_form.hpp"
#include "hsns/error.hpp"
#include "hsns/experiment.hpp"

using namespace hsns;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / "hsns_unit_experiment" / name;
  fs::remove_all(d);
  return d;
}

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// One profile held fixed in time.
Trajectory frozen(const SpectralField& w, double T, int steps) {
  Trajectory tr;
  for (int i = 0; i <= steps; ++i) {
    tr.times.push_back(T * i / steps);
    tr.vorticity.push_back(w);
  }
  return tr;
}

ExperimentConfig small_run() {
  ExperimentConfig c;
  c.command = CommandKind::simulate_ns;
  c.solver.nu = 1e-2;
  c.solver.K = 2;
  c.solver.n_nodes = 96;
  c.solver.T = 0.1;
  c.solver.dt = 0.05;
  return c;
}
}  // namespace

TEST_CASE("config text parses and rejects unknown keys") {
  const auto c = parse_config("# sweep\ncommand = sweep-kato\nnu_list = 1e-3, 1e-4\nK = 6  # modes\nlinear = false\n");
  CHECK(c.command == CommandKind::sweep_kato);
  CHECK(c.nu_list == std::vector<double>{1e-3, 1e-4});
  CHECK(c.solver.K == 6);
  CHECK_THROWS_WITH_AS(parse_config("bogus = 1\n"), doctest::Contains("unknown configuration key"), ConfigError);
  CHECK_THROWS_AS(parse_config("K = six\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("K 6\n"), ConfigError);
  CHECK_THROWS_AS(parse_command("simulate"), ConfigError);
}

TEST_CASE("canonical text roundtrips") {
  auto c = small_run();
  c.nu_list = {1e-3, 4e-4};
  c.datum = "wall_mode:amplitude=0.3";
  const auto back = parse_config(c.to_text());
  CHECK(back.to_text() == c.to_text());
  CHECK(back.hash() == c.hash());
  auto moved = c;
  moved.out_dir = "elsewhere";
  moved.jobs = 4;
  CHECK(moved.hash() == c.hash());
  apply_override(moved, "dt=0.025");
  CHECK(moved.hash() != c.hash());
  CHECK_THROWS_AS(apply_override(moved, "dt"), ConfigError);
}

TEST_CASE("sweep ladders must be positive and decreasing") {
  ExperimentConfig c;
  c.command = CommandKind::sweep_inviscid;
  c.nu_list = {1e-3, 0.0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.nu_list = {1e-4, 1e-3};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.nu_list = {1e-3, 1e-4};
  CHECK_NOTHROW(c.validate());
  c.datum = "no_such_datum";
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("datum descriptors") {
  const auto d = DatumSpec::parse("wall_mode:amplitude=0.5");
  CHECK(d.name == "wall_mode");
  CHECK(d.params.at("amplitude") == 0.5);
  CHECK(DatumSpec::parse("checkpoint:/tmp/x.hsns").checkpoint == "/tmp/x.hsns");
  CHECK_THROWS_AS(DatumSpec::parse("checkpoint:"), ConfigError);
  CHECK_THROWS_AS(named_datum("wall_mode", {{"bogus", 1.0}}), ConfigError);
}

TEST_CASE("Kato functional closed forms") {
  const auto g = std::make_shared<const GradedGrid>(build_graded_grid(60.0, 384, 0.02));
  const double nu = 1e-3, T = 2.0;
  SUBCASE("zero trajectory") {
    CHECK(kato_functional(frozen(SpectralField(g, 2), T, 4), nu) == 0.0);
  }
  SUBCASE("single complex mode |a| e^{-|a| z}") {
    // nu 2 pi T int a^2 e^{-2 a z} dz = pi nu a T
    for (int a : {1, 3}) {
      SpectralField w(g, a, false);
      for (std::size_t j = 0; j < g->size(); ++j) w.mode(a)[j] = a * std::exp(-a * g->nodes[j]);
      CHECK(kato_functional(frozen(w, T, 4), nu) == doctest::Approx(std::numbers::pi * nu * a * T).epsilon(1e-8));
    }
  }
  SUBCASE("real field against physical-space quadrature") {
    const auto w = named_datum("two_mode").sample(g, 2);
    const auto p = inverse_transform(w, 16);
    std::vector<double> row(g->size());
    for (std::size_t j = 0; j < g->size(); ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < 16; ++i) s += p.at(i, j) * p.at(i, j);
      row[j] = s * 2.0 * std::numbers::pi / 16.0;
    }
    CHECK(kato_functional(frozen(w, T, 2), nu) == doctest::Approx(nu * T * integrate(*g, row)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(kato_functional(Trajectory{}, nu), DomainError);
}

TEST_CASE("Kato functional is monotone in the horizon") {
  const auto g = std::make_shared<const GradedGrid>(build_graded_grid(60.0, 128, 0.05));
  const auto w = named_datum("wall_mode").sample(g, 1);
  auto tr = frozen(w, 1.0, 4);
  double prev = 0.0;
  for (std::size_t n = 2; n <= tr.times.size(); ++n) {
    Trajectory part;
    part.times.assign(tr.times.begin(), tr.times.begin() + static_cast<long>(n));
    part.vorticity.assign(tr.vorticity.begin(), tr.vorticity.begin() + static_cast<long>(n));
    const double k = kato_functional(part, 1e-3);
    CHECK(k >= prev);
    prev = k;
  }
}

TEST_CASE("velocity differences and slopes") {
  const auto g = std::make_shared<const GradedGrid>(build_graded_grid(60.0, 256, 0.05));
  const auto w = named_datum("two_mode").sample(g, 2);
  const auto u = velocity_from_vorticity(w);
  CHECK(velocity_lp_difference(u, u, 2.0, 16) == 0.0);
  const auto z = velocity_from_vorticity(w.zeros_like());
  // the L2 norm is also 2 pi sum_a int |u_a|^2
  double s = 0.0;
  for (int a = -2; a <= 2; ++a) {
    std::vector<double> r(g->size());
    for (std::size_t j = 0; j < g->size(); ++j) r[j] = std::norm(u.u1.mode(a)[j]) + std::norm(u.u2.mode(a)[j]);
    s += integrate(*g, r);
  }
  CHECK(velocity_lp_difference(u, z, 2.0, 16) == doctest::Approx(std::sqrt(2.0 * std::numbers::pi * s)).epsilon(1e-12));
  CHECK(velocity_sup(u, 16) > 0.0);
  CHECK(loglog_slope({1.0, 10.0, 100.0}, {2.0, 2.0 * std::sqrt(10.0), 20.0}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(loglog_slope({1.0}, {1.0}), DomainError);
}

TEST_CASE("simulate-ns writes deterministic reports and checkpoints") {
  auto c = small_run();
  c.datum = "shear";
  c.checkpoint_every = 1;
  c.out_dir = scratch("a").string();
  const auto ra = run_experiment(c);
  c.out_dir = scratch("b").string();
  const auto rb = run_experiment(c);
  CHECK(ra.complete);
  CHECK(ra.files == rb.files);
  for (const auto& f : ra.files) {
    if (f == "run_meta.json" || f.ends_with(".meta.json")) continue;
    CHECK_MESSAGE(read(fs::path(ra.out_dir) / f) == read(fs::path(rb.out_dir) / f), f);
  }
  CHECK(ra.summary["trajectory"]["max_no_slip_residual"].get<double>() < 1e-8);
  const auto ts = read(fs::path(ra.out_dir) / "timeseries.csv");
  CHECK(ts.rfind("# hsns-timeseries v1\nt,energy,kato_integrand,", 0) == 0);

  // a written checkpoint restarts a run on the same grid
  auto r = small_run();
  r.datum = "checkpoint:" + (fs::path(ra.out_dir) / "checkpoints/state_000002.hsns").string();
  r.out_dir = scratch("restart").string();
  CHECK(run_experiment(r).complete);
}

TEST_CASE("inviscid sweep table on a short horizon") {
  ExperimentConfig c;
  c.command = CommandKind::sweep_inviscid;
  c.nu_list = {1e-2, 2.5e-3};
  c.solver.K = 2;
  c.solver.n_nodes = 128;
  c.solver.T = 0.2;
  c.solver.dt = 0.05;
  const auto t = inviscid_limit_study(c);
  REQUIRE(t.complete);
  REQUIRE(t.rows.size() == 2);
  for (const auto& r : t.rows) {
    CHECK(r.sup_l2 > 0.0);
    CHECK(r.sup_l4 > 0.0);
    CHECK(r.kato > 0.0);
  }
  CHECK(t.rows[1].sup_l2 < t.rows[0].sup_l2);
  REQUIRE(t.l2_reduction.size() == 1);
  CHECK(t.l2_reduction_per4[0] == doctest::Approx(t.l2_reduction[0]));
  CHECK(to_csv(t).rfind("# hsns-sweep v1\n", 0) == 0);
}

TEST_CASE("verify-green report") {
  ExperimentConfig c;
  c.command = CommandKind::verify_green;
  c.green_samples = 20;
  c.out_dir = scratch("green").string();
  const auto r = run_experiment(c);
  CHECK(r.complete);
  CHECK(r.summary["crosscheck"]["disagreements"].get<std::size_t>() == 0);
  CHECK(r.summary["bounds"].size() == 2);
  CHECK(fs::exists(fs::path(r.out_dir) / "green_crosscheck.csv"));
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(std::nan("")) == "nan");
}
