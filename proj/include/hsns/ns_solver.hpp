#pragma once

// Navier-Stokes in the boundary-vorticity formulation, advanced by Picard
// iteration of the Duhamel formula on each macro step, and an RK4 Euler
// reference solver.

#include <memory>
#include <string>
#include <vector>

#include "hsns/biot_savart.hpp"
#include "hsns/fieldkit.hpp"
#include "hsns/stokes_semigroup.hpp"

namespace hsns {

struct SolverConfig {
  double nu = 1e-3;
  int K = 16;
  double z_max = 60.0;
  std::size_t n_nodes = 384;
  double delta_ref = 0.0;  // <= 0: min(sqrt(nu), sqrt(nu dt)) for nu > 0, else 0.05
  std::size_t nx = 0;      // 0: default_nx(K)
  double T = 1.0;
  double dt = 0.01;
  double picard_tol = 1e-10;
  int picard_max = 30;
  int max_halvings = 6;
  double dealias_fraction = 2.0 / 3.0;
  int n_time_quad = 10;
  bool linear = false;  // drop the nonlinearity (Stokes flow)

  void validate() const;
  double resolved_delta_ref() const;
  std::size_t resolved_nx() const;
  std::shared_ptr<const GradedGrid> make_grid() const;
};

/// Velocity, derivatives and products in physical space; shares one Poisson solver.
class NonlinearOperator {
 public:
  NonlinearOperator(std::shared_ptr<const GradedGrid> grid, int truncation, std::size_t nx, double dealias_fraction);

  /// N = u . grad w, dealiased.
  SpectralField operator()(const SpectralField& w) const;
  const PoissonSolver& poisson() const { return poisson_; }
  std::size_t nx() const { return nx_; }
  int kept_modes() const { return kept_; }

 private:
  PoissonSolver poisson_;
  std::size_t nx_;
  int kept_;
};

SpectralField nonlinear_term(const SpectralField& w, double dealias_fraction = 2.0 / 3.0);

/// Discrete W^{1,1} norm with zero analytic weight:
/// sum_alpha (|w_alpha|_1 + |alpha| |w_alpha|_1 + |psi dz w_alpha|_1).
double w11_norm(const SpectralField& w);

struct PicardReport {
  int iterations = 0;
  std::vector<double> increments;   // W^{1,1} size of successive corrections
  std::vector<double> contraction;  // ratios of successive increments
  bool converged = false;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> vorticity;
  std::vector<int> iterations;               // Picard iterations (summed over sub-steps)
  std::vector<double> max_contraction;
  std::vector<int> halvings;
  std::vector<double> u1_wall;               // sup_x |u1(t, x, 0)|
  std::vector<double> no_slip_residual;      // sup_x |u1(t, x, 0) - u1(0, x, 0)|
  std::vector<double> u2_wall;               // sup_x |u2(t, x, 0)|
  std::vector<double> divergence_residual;
  std::vector<double> reality_defect;
  std::vector<double> energy;                // (1/2) int |u|^2 dx dz
  bool complete = true;
  std::string failure;

  Velocity velocity(std::size_t i) const;
};

class NavierStokesSolver {
 public:
  explicit NavierStokesSolver(const SolverConfig& config);

  const SolverConfig& config() const { return cfg_; }
  std::shared_ptr<const GradedGrid> grid() const { return grid_; }
  const NonlinearOperator& nonlinearity() const { return nl_; }

  /// One Picard-converged step of length dt from w. Throws NumericalError on
  /// non-contraction (report.converged = false) or when picard_max is exceeded.
  SpectralField step_picard(const SpectralField& w, double dt, PicardReport& report);
  /// As step_picard, halving dt on non-contraction up to max_halvings times.
  SpectralField advance(const SpectralField& w, double dt, PicardReport& total, int& halvings);

  SpectralField zero_field() const;

 private:
  SpectralField source(const SpectralField& w) const;
  SolverConfig cfg_;
  std::shared_ptr<const GradedGrid> grid_;
  NonlinearOperator nl_;
  StokesPropagator prop_;
};

/// Exceptions are caught: a failed run returns the partial trajectory with
/// complete = false and the reason in `failure`.
Trajectory run_navier_stokes(const SolverConfig& config, const SpectralField& w0);
Trajectory run_euler(const SolverConfig& config, const SpectralField& w0);

/// Per-time diagnostics appended to a trajectory (used by both solvers).
void record_state(Trajectory& traj, double t, const SpectralField& w, const PoissonSolver& poisson, std::size_t nx,
                  const std::vector<cd>& u1_wall0);

double kinetic_energy(const Velocity& u);

}  // namespace hsns
