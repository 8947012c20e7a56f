#pragma once

// Per-mode half-space Dirichlet Poisson solver, velocity recovery and the
// boundary trace of the vorticity-flux condition.

#include <memory>
#include <span>
#include <vector>

#include "hsns/fieldkit.hpp"

namespace hsns {

/// Stream function of one Fourier mode: d^2 phi - alpha^2 phi = omega, phi(0) = 0.
struct StreamFunctionMode {
  int alpha = 0;
  Profile phi;
  Profile dphi;  // d phi / dz, computed from the same kernel integrals
};

/// Exponentially weighted running integrals of the cubic interpolant,
/// precomputed for one |alpha| on one grid.
///
///   lower(z) = int_0^z  e^{-A(z-y)} f(y) dy
///   upper(z) = int_z^zmax e^{-A(y-z)} f(y) dy
class ExpIntegrals {
 public:
  ExpIntegrals() = default;
  ExpIntegrals(const GradedGrid& grid, int abs_alpha);

  void lower(std::span<const cd> f, std::span<cd> out) const;
  void upper(std::span<const cd> f, std::span<cd> out) const;
  /// int_0^z y f(y) dy (meaningful for the zero mode).
  void moment(std::span<const cd> f, std::span<cd> out) const;

  /// q with upper(f)(0) = sum_j q_j f_j, i.e. int_0^zmax e^{-A y} f(y) dy.
  std::vector<double> wall_weights() const;

  int abs_alpha() const { return a_; }

 private:
  int a_ = 0;
  std::size_t n_ = 0;
  std::vector<std::size_t> first_;
  std::vector<double> decay_;
  std::vector<std::array<double, 4>> wl_, wu_, wm_;
};

/// Holds ExpIntegrals for |alpha| = 0..K on one grid.
class PoissonSolver {
 public:
  PoissonSolver(std::shared_ptr<const GradedGrid> grid, int truncation);

  const GradedGrid& grid() const { return *grid_; }
  int truncation() const { return k_; }

  StreamFunctionMode solve(std::span<const cd> omega, int alpha) const;
  /// g_alpha = -int_0^inf e^{-|alpha| y} N_alpha(y) dy.
  cd trace(std::span<const cd> n_alpha, int alpha) const;
  const ExpIntegrals& integrals(int abs_alpha) const { return ints_.at(static_cast<std::size_t>(abs_alpha)); }

 private:
  std::shared_ptr<const GradedGrid> grid_;
  int k_;
  std::vector<ExpIntegrals> ints_;
};

StreamFunctionMode solve_poisson_mode(std::span<const cd> omega, int alpha, const GradedGrid& grid);

/// Max |phi'' - alpha^2 phi - omega| over interior nodes (finite differences).
double poisson_residual(const StreamFunctionMode& s, std::span<const cd> omega, const GradedGrid& grid);

struct Velocity {
  SpectralField u1;
  SpectralField u2;
};

/// u1_alpha = d phi_alpha / dz, u2_alpha = -i alpha phi_alpha.
Velocity velocity_from_vorticity(const SpectralField& omega);
Velocity velocity_from_vorticity(const SpectralField& omega, const PoissonSolver& solver);

/// max over modes and nodes of |i alpha u1 + dz u2|.
double divergence_residual(const Velocity& u);

/// Boundary source g_alpha = [dz Delta^{-1} N]_alpha(0), indexed alpha + K.
std::vector<cd> boundary_source_trace(const SpectralField& n);
std::vector<cd> boundary_source_trace(const SpectralField& n, const PoissonSolver& solver);

/// Multiplication by |alpha|; input and output indexed alpha + K.
std::vector<cd> dirichlet_to_neumann(std::span<const cd> h);
inline cd dirichlet_to_neumann(cd h, int alpha) { return static_cast<double>(alpha < 0 ? -alpha : alpha) * h; }

}  // namespace hsns
