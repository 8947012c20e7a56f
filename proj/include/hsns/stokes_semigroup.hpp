#pragma once

// Solution operators of the per-mode Stokes problem
//   d_t w - nu (dz^2 - alpha^2) w = f,   nu (dz + |alpha|) w = g at z = 0,
// discretized by product integration of the exact Green function against
// the piecewise-cubic interpolant on the graded grid.

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "hsns/fieldkit.hpp"

namespace hsns {

/// Row-major n x n real operator acting on nodal values.
struct KernelMatrix {
  std::size_t n = 0;
  std::vector<double> a;

  double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
  void apply(std::span<const cd> in, std::span<cd> out) const;
  void apply_add(std::span<const cd> in, std::span<cd> out) const;
};

/// (S(t) f)(z_i) = int_0^zmax G_alpha(t, y; z_i) f(y) dy.
KernelMatrix semigroup_matrix(const GradedGrid& grid, int abs_alpha, double nu, double t);

/// G_alpha(t, 0; z_i), the response to a unit boundary flux.
std::vector<double> trace_kernel(const GradedGrid& grid, int abs_alpha, double nu, double t);

/// Time nodes of a Duhamel solve. The interior term uses a Gauss rule in
/// sqrt(t - s) (n_time_quad points), the boundary term an adaptive rule in
/// the same variable, which absorbs the (t - s)^{-1/2} endpoint singularity.
struct DuhamelSchedule {
  std::vector<double> times;
  int n_time_quad = 10;

  static DuhamelSchedule uniform(double T, double dt);
  void validate() const;
};

/// Operators advancing one interval of length dt with linear-in-time sources:
///   w(dt) = S w0 + Phi0 f0 + Phi1 f1 - (W0 g0 + W1 g1)
/// where f0, g0 are the sources at the start of the interval and f1, g1 at the end.
class StokesStep {
 public:
  struct ModeOps {
    KernelMatrix S, phi0, phi1;
    std::vector<double> w0, w1;
  };

  /// With `conservative`, each operator is corrected by a rank-one term along
  /// the boundary response so that the discrete wall functional
  /// J(f) = int e^{-|alpha| y} f dy is propagated exactly as in the continuum
  /// (J(S f) = J(f), J(Phi_k f) = dt/2 J(f), J(W_k) = dt/2).
  StokesStep(std::shared_ptr<const GradedGrid> grid, double nu, double dt, int truncation, int n_time_quad = 10,
             bool conservative = true);

  double dt() const { return dt_; }
  double nu() const { return nu_; }
  int truncation() const { return k_; }
  const GradedGrid& grid() const { return *grid_; }
  const ModeOps& ops(int abs_alpha) const { return ops_.at(static_cast<std::size_t>(abs_alpha)); }

  /// Semigroup part only.
  SpectralField propagate(const SpectralField& w) const;
  /// Full step; null sources and empty traces are treated as zero.
  SpectralField step(const SpectralField& w, const SpectralField* f0, const SpectralField* f1,
                     std::span<const cd> g0, std::span<const cd> g1) const;
  /// out += Phi1 f1 - W1 g1 (the end-of-interval sources alone).
  void add_end_sources(const SpectralField& f1, std::span<const cd> g1, SpectralField& out) const;

 private:
  static void make_conservative(ModeOps& op, const std::vector<double>& q, double dt,
                                const std::vector<double>& boundary_response);
  std::shared_ptr<const GradedGrid> grid_;
  double nu_;
  double dt_;
  int k_;
  std::vector<ModeOps> ops_;
};

/// Caches StokesStep operators by step size.
class StokesPropagator {
 public:
  StokesPropagator(std::shared_ptr<const GradedGrid> grid, double nu, int truncation, int n_time_quad = 10,
                   bool conservative = true);
  const StokesStep& step(double dt);

 private:
  std::shared_ptr<const GradedGrid> grid_;
  double nu_;
  int k_;
  int nq_;
  bool conservative_;
  std::map<double, std::unique_ptr<StokesStep>> cache_;
};

SpectralField apply_semigroup(const SpectralField& w, double nu, double t);

/// (Gamma(nu t) g)_alpha = G_alpha(t, 0; z) g_alpha; g indexed alpha + K.
SpectralField apply_trace_operator(std::span<const cd> g, std::shared_ptr<const GradedGrid> grid, int truncation,
                                   double nu, double t);

using ForcingFn = std::function<SpectralField(double)>;
using TraceFn = std::function<std::vector<cd>(double)>;

struct StokesTrajectory {
  std::vector<double> times;
  std::vector<SpectralField> fields;
  /// max_alpha |nu (dz + |alpha|) w_alpha(0) - g_alpha| per stored time (t > 0).
  std::vector<double> bc_residual;
};

/// Solves the inhomogeneous Stokes problem on the schedule. Either callable may be empty.
StokesTrajectory duhamel_solve_stokes(const SpectralField& w0, const ForcingFn& f, const TraceFn& g, double nu,
                                      const DuhamelSchedule& schedule, bool conservative = true);

/// max_alpha |nu (dz + |alpha|) w_alpha|_{z=0} - g_alpha| using one-sided differences.
double boundary_flux_residual(const SpectralField& w, double nu, std::span<const cd> g);

}  // namespace hsns
