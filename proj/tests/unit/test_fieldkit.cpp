#include <cmath>
#include <numbers>

#include "doctest.h"

#include "hsns/error.hpp"
#include "hsns/fieldkit.hpp"
#include "hsns/special.hpp"

using namespace hsns;

namespace {
std::shared_ptr<const GradedGrid> make_grid(std::size_t n = 256, double delta = 0.05) {
  return std::make_shared<const GradedGrid>(build_graded_grid(60.0, n, delta));
}
}  // namespace

TEST_CASE("graded grid is increasing and spans the domain") {
  const auto g = make_grid();
  CHECK(g->nodes.front() == 0.0);
  CHECK(g->nodes.back() == doctest::Approx(60.0));
  for (std::size_t i = 1; i < g->size(); ++i) CHECK(g->nodes[i] > g->nodes[i - 1]);
  CHECK(g->first_cell() < g->max_cell());
  CHECK_THROWS_AS(build_graded_grid(-1.0, 64, 0.1), Error);
}

TEST_CASE("grid weights integrate cubics exactly") {
  const auto g = make_grid(128, 0.1);
  std::vector<double> f(g->size());
  for (std::size_t j = 0; j < g->size(); ++j) f[j] = std::pow(g->nodes[j], 3) - 2.0 * g->nodes[j];
  const double z = g->z_max;
  CHECK(integrate(*g, f) == doctest::Approx(std::pow(z, 4) / 4.0 - z * z).epsilon(1e-12));
}

TEST_CASE("grid quadrature of a decaying exponential") {
  const auto g = make_grid();
  std::vector<double> f(g->size());
  for (std::size_t j = 0; j < g->size(); ++j) f[j] = std::exp(-g->nodes[j]);
  CHECK(integrate(*g, f) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("transform roundtrip and reality") {
  const auto g = make_grid(64, 0.1);
  const int K = 3;
  SpectralField w(g, K, true);
  for (int a = 0; a <= K; ++a) {
    for (std::size_t j = 0; j < g->size(); ++j) w.mode(a)[j] = cd(a == 0 ? 1.0 : 0.5, a == 0 ? 0.0 : -0.25 * a) * std::exp(-g->nodes[j]);
  }
  w.enforce_reality();
  CHECK(w.reality_defect() == doctest::Approx(0.0));
  const auto p = inverse_transform(w, default_nx(K));
  const auto back = forward_transform(p, K);
  double err = 0.0;
  for (int a = -K; a <= K; ++a) {
    for (std::size_t j = 0; j < g->size(); ++j) err = std::max(err, std::abs(back.mode(a)[j] - w.mode(a)[j]));
  }
  CHECK(err < 1e-14);
}

TEST_CASE("default nx is a power of two covering 4K") {
  CHECK(default_nx(0) == 4);
  CHECK(default_nx(5) == 32);
  CHECK(is_power_of_two(64));
  CHECK_FALSE(is_power_of_two(48));
}

TEST_CASE("arithmetic requires matching shapes") {
  const auto g1 = make_grid(64, 0.1);
  const auto g2 = make_grid(96, 0.1);
  SpectralField a(g1, 1), b(g2, 1), c(g1, 2);
  CHECK_THROWS_AS(a + b, DomainError);
  CHECK_THROWS_AS(a - c, DomainError);
  // equal grids held by different objects are compatible
  SpectralField d(make_grid(64, 0.1), 1);
  CHECK_NOTHROW(a + d);
}

TEST_CASE("conormal derivative vanishes at the wall") {
  const auto g = make_grid(512, 0.05);
  Profile f(g->size());
  for (std::size_t j = 0; j < g->size(); ++j) f[j] = std::exp(-g->nodes[j]);
  const auto d = conormal_derivative(f, *g);
  CHECK(std::abs(d[0]) < 1e-14);
  const std::size_t j = g->count_below(2.0);
  const double z = g->nodes[j];
  CHECK(d[j].real() == doctest::Approx(-psi(z) * std::exp(-z)).epsilon(1e-3));
}

TEST_CASE("scaled complementary error function") {
  for (double x : {-2.0, -0.5, 0.0, 0.3, 1.0, 4.0, 5.5}) {
    CHECK(erfcx(x) == doctest::Approx(std::exp(x * x) * std::erfc(x)).epsilon(1e-13));
  }
  // x erfcx(x) -> 1/sqrt(pi) with correction 1 - 1/(2x^2)
  for (double x : {60.0, 1e3, 1e6}) {
    const double expect = (1.0 - 0.5 / (x * x) + 0.75 / std::pow(x, 4)) / std::sqrt(std::numbers::pi);
    CHECK(x * erfcx(x) == doctest::Approx(expect).epsilon(1e-12));
  }
  // e^{900} overflows on its own
  CHECK(exp_erfc(900.0, 30.0) == doctest::Approx(erfcx(30.0)).epsilon(1e-12));
  CHECK(exp_erfc(2.0, 1.0) == doctest::Approx(std::exp(2.0) * std::erfc(1.0)).epsilon(1e-13));
}
