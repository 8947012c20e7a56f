#include <cmath>

#include "doctest.h"

#include "hsns/biot_savart.hpp"
#include "hsns/closed_form.hpp"
#include "hsns/error.hpp"
#include "hsns/green_stokes.hpp"
#include "hsns/stokes_semigroup.hpp"

using namespace hsns;

namespace {
std::shared_ptr<const GradedGrid> make_grid(std::size_t n = 256, double delta = 0.05) {
  return std::make_shared<const GradedGrid>(build_graded_grid(60.0, n, delta));
}

double l1(const SpectralField& w) {
  double s = 0.0;
  for (int a = -w.truncation(); a <= w.truncation(); ++a) s += integrate_abs(w.grid(), w.mode(a));
  return s;
}
}  // namespace

TEST_CASE("semigroup at t = 0 is the identity and rejects negative times") {
  const auto g = make_grid();
  const auto w = named_datum("two_mode").sample(g, 2);
  const auto same = apply_semigroup(w, 1e-3, 0.0);
  CHECK(l1(same - w) == 0.0);
  CHECK_THROWS_AS(apply_semigroup(w, 1e-3, -1.0), DomainError);
}

TEST_CASE("stationary Stokes mode is preserved") {
  const auto g = make_grid(512, std::sqrt(1e-3));
  SpectralField w(g, 2, true);
  for (std::size_t j = 0; j < g->size(); ++j) w.mode(2)[j] = 2.0 * std::exp(-2.0 * g->nodes[j]);
  w.enforce_reality();
  CHECK(l1(apply_semigroup(w, 1e-3, 1.0) - w) / l1(w) < 1e-6);
}

TEST_CASE("zero mode conserves its integral") {
  // Neumann condition in mode 0: int w dz is invariant
  const auto g = make_grid();
  SpectralField w(g, 0, true);
  for (std::size_t j = 0; j < g->size(); ++j) w.mode(0)[j] = g->nodes[j] * std::exp(-g->nodes[j]);
  const auto s = apply_semigroup(w, 1e-2, 2.0);
  CHECK(integrate(*g, s.mode(0)).real() == doctest::Approx(integrate(*g, w.mode(0)).real()).epsilon(1e-7));
}

TEST_CASE("semigroup composition") {
  const auto g = make_grid(384, std::sqrt(1e-3));
  const auto w = named_datum("wall_mode").sample(g, 1);
  const auto two = apply_semigroup(apply_semigroup(w, 1e-3, 0.25), 1e-3, 0.25);
  const auto one = apply_semigroup(w, 1e-3, 0.5);
  CHECK(l1(two - one) / l1(w) < 1e-5);
}

TEST_CASE("evolved field satisfies the homogeneous flux condition") {
  const auto g = make_grid(512, 0.1);
  const auto w = closed_form_corpus().front().sample(g, 1);
  CHECK(boundary_flux_residual(apply_semigroup(w, 1e-2, 0.5), 1e-2, {}) < 1e-6);
}

TEST_CASE("trace operator applies the wall response per mode") {
  const auto g = make_grid(256, 0.1);
  const std::vector<cd> flux{0.0, 0.0, cd(2.0, -1.0), 0.0, 0.0};
  const auto r = apply_trace_operator(flux, g, 2, 1e-2, 0.3);
  const auto k = trace_kernel(*g, 0, 1e-2, 0.3);
  REQUIRE(k.size() == g->size());
  for (std::size_t j = 0; j < g->size(); j += 17) {
    CHECK(std::abs(r.mode(0)[j] - cd(2.0, -1.0) * k[j]) < 1e-14 * std::abs(k[j]) + 1e-300);
    CHECK(k[j] == doctest::Approx(green_function(1e-2, 0, 0.3, 0.0, g->nodes[j])));
    CHECK(r.mode(1)[j] == cd(0.0));
  }
  CHECK_THROWS_AS(apply_trace_operator(flux, g, 1, 1e-2, 0.3), DomainError);
}

TEST_CASE("Duhamel solve with a manufactured solution") {
  // w = e^{-t} e^{-z} in mode 1: f = -w, g = 0
  const double nu = 1e-2;
  const auto g = make_grid(256, 0.2);
  auto field = [&](double t, double c) {
    SpectralField w(g, 1, true);
    for (std::size_t j = 0; j < g->size(); ++j) w.mode(1)[j] = c * std::exp(-t - g->nodes[j]);
    w.enforce_reality();
    return w;
  };
  const auto tr = duhamel_solve_stokes(field(0.0, 1.0), [&](double t) { return field(t, -1.0); }, {}, nu,
                                       DuhamelSchedule::uniform(0.5, 0.05));
  REQUIRE(tr.times.size() == 11);
  CHECK(l1(tr.fields.back() - field(0.5, 1.0)) / l1(field(0.5, 1.0)) < 1e-3);
  for (double r : tr.bc_residual) CHECK(r < 1e-5);
}

TEST_CASE("conservative step propagates the wall functional") {
  const auto g = make_grid(192, 0.05);
  const StokesStep step(g, 1e-3, 0.05, 2);
  const auto w = named_datum("two_mode").sample(g, 2);
  const auto s = step.propagate(w);
  const PoissonSolver ps(g, 2);
  for (int a = 0; a <= 2; ++a) {
    // J(f) = int e^{-|a| y} f dy with the weights the step is built from
    const auto q = ps.integrals(a).wall_weights();
    cd jw = 0.0, js = 0.0;
    for (std::size_t j = 0; j < g->size(); ++j) {
      jw += q[j] * w.mode(a)[j];
      js += q[j] * s.mode(a)[j];
    }
    CHECK(std::abs(js - jw) < 1e-12 * std::max(1.0, std::abs(jw)));
  }
}

TEST_CASE("schedule validation") {
  const auto s = DuhamelSchedule::uniform(1.0, 0.3);
  CHECK(s.times.front() == 0.0);
  CHECK(s.times.back() == doctest::Approx(1.0));
  DuhamelSchedule bad;
  bad.times = {0.0, 0.5, 0.4};
  CHECK_THROWS(bad.validate());
}
