#pragma once

// Per-mode Stokes Green function G_alpha(t, y; z) = H_alpha + R_alpha for
// d_t w = nu (dz^2 - alpha^2) w with nu (dz + |alpha|) w = 0 at z = 0.

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace hsns {

struct ResolventPoint {
  std::complex<double> lambda;
  int alpha = 0;
  double nu = 0.0;
  std::complex<double> mu;  // sqrt((lambda + alpha^2 nu) / nu), Re mu > 0
};

ResolventPoint make_resolvent_point(std::complex<double> lambda, int alpha, double nu);

/// Heat part H_{lambda,alpha} of the resolvent kernel.
std::complex<double> resolvent_heat(const ResolventPoint& p, double y, double z);
/// Boundary part R_{lambda,alpha} = |alpha|(|alpha|+mu)/(lambda mu) e^{-mu(y+z)}.
std::complex<double> resolvent_residual(const ResolventPoint& p, double y, double z);
/// H + R.
std::complex<double> resolvent_kernel(std::complex<double> lambda, int alpha, double nu, double y, double z);

/// Neumann heat kernel (4 pi nu t)^{-1/2}(e^{-(y-z)^2/4nu t} + e^{-(y+z)^2/4nu t}) e^{-alpha^2 nu t}.
double heat_kernel_neumann(double nu, int alpha, double t, double y, double z);
double heat_kernel_neumann_dz(double nu, int alpha, double t, double y, double z);

/// R_alpha(t,y;z) = |alpha| e^{-|alpha| zeta} erfc(zeta / (2 sqrt(tau)) - |alpha| sqrt(tau)),
/// zeta = y + z, tau = nu t.
double residual_kernel(double nu, int alpha, double t, double y, double z);
double residual_kernel_dz(double nu, int alpha, double t, double y, double z);

/// Reflection representation 2|alpha| e^{-alpha^2 tau} int_zeta^inf e^{|alpha|(w-zeta)} G(tau, w) dw,
/// integrated numerically (no error-function evaluation).
double residual_kernel_quadrature(double nu, int alpha, double t, double y, double z);

/// Full-line reflection without the decaying branch: |alpha| e^{|alpha| zeta} erfc(zeta/2sqrt(tau) + |alpha| sqrt(tau)).
/// Not a Green function of the Robin problem; kept to document the difference.
double residual_kernel_reflection_full_line(double nu, int alpha, double t, double y, double z);

double green_function(double nu, int alpha, double t, double y, double z);
double green_function_dz(double nu, int alpha, double t, double y, double z);

struct ContourParams {
  double M = 4.0;
  double b_max = 0.0;    // 0 selects from the Gaussian tail criterion
  int max_depth = 18;    // adaptive Gauss-Kronrod bisection depth
  double tail_tol = 1e-10;
  double tol = 1e-12;    // relative quadrature tolerance
};

enum class ContourRegime { zero_mode, pencil, parabola, parabola_shifted };

struct ContourResult {
  double residual = 0.0;  // R_alpha from the inverse Laplace integral
  double total = 0.0;     // + H_alpha
  double error_estimate = 0.0;
  double residue = 0.0;   // included in `residual` when the pole is crossed
  double a = 0.0;
  double b_max = 0.0;
  ContourRegime regime = ContourRegime::zero_mode;
};

/// Inverse Laplace transform of the resolvent boundary part along a contour
/// adapted to the saddle a = (y+z)/(2 nu t). Throws NumericalError if the tail
/// criterion fails.
ContourResult green_contour_oracle(double nu, int alpha, double t, double y, double z,
                                   const ContourParams& params = {});

std::string to_string(ContourRegime r);

struct BoundSweep {
  std::vector<double> nus{1e-2, 1e-3, 1e-4};
  std::vector<int> alphas{0, 1, 2, 4, 8, 16};
  double t_min = 1e-3;
  double t_max = 1.0;
  int n_t = 12;
  int n_zeta = 48;
  double zeta_extent = 1.0;  // multiplier on the sampled zeta range
  std::vector<double> theta_candidates;  // empty: geometric ladder in [0.005, 10]
};

struct BoundReport {
  int k = 0;
  double theta0 = 0.0;
  double C = 0.0;
  double mu_f_min = 0.0;
  double mu_f_max = 0.0;
  double max_ratio = 0.0;  // max |dz^k R| / (C bound) at the fitted theta0
  std::size_t n_samples = 0;
  bool found = false;
  std::vector<std::pair<double, double>> theta_scan;  // (theta0, C(theta0))
  BoundSweep sweep;
};

/// Fits the largest theta0 for which |dz^k R| <= C (mu_f^{k+1} e^{-theta0 mu_f zeta}
/// + tau^{-(k+1)/2} e^{-theta0 zeta^2 / tau} e^{-alpha^2 tau / 8}) holds with a moderate C.
BoundReport verify_pointwise_bounds(const BoundSweep& sweep, int k);

/// Max ratio |dz^k R| / bound(theta0) over the sweep (C = 1).
double bound_ratio(const BoundSweep& sweep, int k, double theta0);

nlohmann::json to_json(const BoundReport& r);

/// One point of the three-way comparison closed form / reflection quadrature / contour.
struct GreenSample {
  double nu = 0.0;
  int alpha = 0;
  double t = 0.0;
  double y = 0.0;
  double z = 0.0;
  double closed = 0.0;
  double quadrature = 0.0;
  double contour = 0.0;
  ContourRegime regime = ContourRegime::zero_mode;
  bool agree = false;
};

struct GreenCrossCheck {
  std::vector<GreenSample> samples;
  double max_rel_quadrature = 0.0;  // max |closed - quadrature| / max(|closed|, abs_tol / rel_tol)
  double max_rel_contour = 0.0;
  std::size_t n_small_alpha2nu = 0;  // samples with alpha^2 nu <= 1
  std::size_t n_large_alpha2nu = 0;
  std::size_t disagreements = 0;
  double rel_tol = 0.0;
  double abs_tol = 0.0;
};

/// Random points (deterministic in `seed`) alternating between alpha^2 nu <= 1
/// and alpha^2 nu >= 1; a point agrees when every pair differs by at most
/// rel_tol relative or abs_tol absolute.
GreenCrossCheck cross_validate_green(std::size_t n_samples, std::uint64_t seed, double rel_tol = 1e-6,
                                     double abs_tol = 1e-10);

nlohmann::json to_json(const GreenCrossCheck& r);

}  // namespace hsns
