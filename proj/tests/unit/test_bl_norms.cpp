#include <cmath>

#include "doctest.h"

#include "hsns/bl_norms.hpp"
#include "hsns/closed_form.hpp"
#include "hsns/error.hpp"
#include "hsns/ns_solver.hpp"

using namespace hsns;

TEST_CASE("weight function") {
  CHECK(phi_P(0.0, 2.0) == 1.0);
  CHECK(phi_P(2.0, 2.0) == doctest::Approx(0.2));
  const auto p = BLWeightParams::at(1e-4, 0.25);
  CHECK(p.delta == doctest::Approx(1e-2));
  CHECK(p.delta_t == doctest::Approx(5e-3));
  CHECK(bl_weight(0.0, 0.25, p) == doctest::Approx(1.0 + 200.0 + 100.0));
  // t = 0 drops the sqrt(nu t) layer
  CHECK(bl_weight(0.0, 0.0, BLWeightParams::at(1e-4, 0.0)) == doctest::Approx(101.0));
  BLWeightParams bad;
  bad.P = 0.5;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("L1 norm of e^{-z} along the pencil") {
  ClosedFormField f;
  f.name = "exp";
  f.modes[0] = ClosedFormProfile({{1.0, 0, 1.0}});
  AnalyticNormSpec s;
  s.k = 0;
  CHECK(analytic_norms(f, s).l1 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(analytic_norms(f, s).linf == doctest::Approx(1.0));
  // tilting the path lengthens it and keeps |e^{-z}| = e^{-Re z}
  s.sigma = 0.5;
  s.theta_samples = AnalyticNormSpec::default_thetas(0.5);
  CHECK(analytic_norms(f, s).l1 > 1.0);
}

TEST_CASE("pencil path weights measure arc length") {
  const auto p = make_pencil_path(0.4, 1, 12, 10.0);
  double len = 0.0;
  for (double w : p.w) len += w;
  CHECK(len == doctest::Approx(std::hypot(1.0, 0.4) + 9.0).epsilon(1e-12));
  CHECK(p.z.front().real() >= 0.0);
}

TEST_CASE("grid and closed-form norms agree at theta = 0") {
  const auto corpus = closed_form_corpus();
  const auto g = std::make_shared<const GradedGrid>(build_graded_grid(60.0, 512, 0.02));
  AnalyticNormSpec s;
  s.rho = 0.3;
  for (const auto& f : corpus) {
    if (f.name != "zexp" && f.name != "two_mode" && f.name != "oscillating") continue;
    const auto a = analytic_norms(f, s);
    const auto b = analytic_norms(f.sample(g, f.truncation()), s);
    CHECK(b.l1 == doctest::Approx(a.l1).epsilon(1e-6));
    CHECK(b.wk1 == doctest::Approx(a.wk1).epsilon(1e-4));
    CHECK(b.linf == doctest::Approx(a.linf).epsilon(1e-3));
  }
}

TEST_CASE("boundary-layer norm of a layer profile") {
  // w = e^{-z/delta}: sup e^{beta z} w / weight is near 1 / (1 + 1/delta) at the wall
  const double nu = 1e-4;
  const auto g = std::make_shared<const GradedGrid>(build_graded_grid(60.0, 384, 0.01));
  SpectralField w(g, 0, true);
  for (std::size_t j = 0; j < g->size(); ++j) w.mode(0)[j] = std::exp(-g->nodes[j] / 0.01);
  const auto p = BLWeightParams::at(nu, 0.0);
  CHECK(bl_norm(w, 0.0, 0.0, p) == doctest::Approx(1.0 / 101.0).epsilon(1e-6));
  SpectralField w1(g, 2, true);
  CHECK_THROWS_AS(bl_norm(w1, 0.0, 400.0, p), DomainError);
}

TEST_CASE("rho ladder approaches the admissible radius") {
  IterativeNormSpec s;
  s.gamma = 0.5;
  const auto r = s.rho_ladder(1.0);
  REQUIRE(r.size() == 16);
  CHECK(r.front() == doctest::Approx(0.25));
  CHECK(r.back() < 0.5);
  for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i] > r[i - 1]);
}

TEST_CASE("lemma suite on the corpus") {
  const auto corpus = closed_form_corpus();
  REQUIRE(corpus.size() == 20);
  const auto r = verify_norm_lemmas(corpus);
  CHECK(r.get("product").max_ratio <= 1.0);
  CHECK(r.get("embedding_pointwise").max_ratio <= 1.0 + 1e-12);
  CHECK(r.get("derivative_loss_x").within_bound);
  for (const auto& c : r.checks) {
    CHECK(c.finite);
    CHECK(c.refinement_change() < 1e-2);
  }
  CHECK_THROWS(r.get("no_such_check"));
  CHECK(elliptic_ratio_refinement_change(corpus, 256) < 1e-2);
}

TEST_CASE("profile constant and iterative norms along a run") {
  SolverConfig c;
  c.nu = 1e-2;
  c.K = 2;
  c.n_nodes = 128;
  c.T = 0.2;
  c.dt = 0.1;
  const auto tr = run_navier_stokes(c, named_datum("wall_mode").sample(c.make_grid(), c.K));
  REQUIRE(tr.complete);
  const auto c0 = bl_profile_fit(tr, c.nu);
  REQUIRE(c0.size() == tr.times.size());
  for (double v : c0) CHECK(std::isfinite(v));
  IterativeNormSpec s;
  s.gamma = 1.0;
  const auto it = iterative_norms(tr, s, c.nu);
  CHECK(it.A > 0.0);
  CHECK(it.B > 0.0);
  CHECK(it.times.size() == it.a_curve.size());
}
