#include "hsns/biot_savart.hpp"

#include <cmath>
#include <cstdlib>

#include "hsns/error.hpp"
#include "hsns/quadrature.hpp"

namespace hsns {

namespace {

void check_finite(std::span<const cd> f, const char* what) {
  for (const auto& v : f) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw NumericalError(std::string(what) + ": non-finite profile value");
    }
  }
}

}  // namespace

ExpIntegrals::ExpIntegrals(const GradedGrid& grid, int abs_alpha) : a_(abs_alpha), n_(grid.size()) {
  const double a = static_cast<double>(abs_alpha);
  const std::size_t cells = n_ - 1;
  first_.resize(cells);
  decay_.resize(cells);
  wl_.assign(cells, {});
  wu_.assign(cells, {});
  wm_.assign(cells, {});
  for (std::size_t c = 0; c < cells; ++c) {
    const double z0 = grid.nodes[c];
    const double z1 = grid.nodes[c + 1];
    const double h = z1 - z0;
    first_[c] = stencil_start(c, n_);
    decay_[c] = std::exp(-a * h);
    const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil(a * h / 2.0)));
    gl::for_each_point(z0, z1, pieces, [&](double y, double w) {
      const auto basis = stencil_basis(grid, first_[c], y);
      const double el = std::exp(-a * (z1 - y));
      const double eu = std::exp(-a * (y - z0));
      for (std::size_t k = 0; k < 4; ++k) {
        wl_[c][k] += w * el * basis[k];
        wu_[c][k] += w * eu * basis[k];
        wm_[c][k] += w * y * basis[k];
      }
    });
  }
}

void ExpIntegrals::lower(std::span<const cd> f, std::span<cd> out) const {
  out[0] = 0.0;
  for (std::size_t c = 0; c + 1 < n_; ++c) {
    const cd* fs = f.data() + first_[c];
    const auto& w = wl_[c];
    out[c + 1] = decay_[c] * out[c] + (w[0] * fs[0] + w[1] * fs[1] + w[2] * fs[2] + w[3] * fs[3]);
  }
}

void ExpIntegrals::upper(std::span<const cd> f, std::span<cd> out) const {
  out[n_ - 1] = 0.0;
  for (std::size_t c = n_ - 1; c-- > 0;) {
    const cd* fs = f.data() + first_[c];
    const auto& w = wu_[c];
    out[c] = decay_[c] * out[c + 1] + (w[0] * fs[0] + w[1] * fs[1] + w[2] * fs[2] + w[3] * fs[3]);
  }
}

std::vector<double> ExpIntegrals::wall_weights() const {
  std::vector<double> q(n_, 0.0);
  double p = 1.0;
  for (std::size_t c = 0; c + 1 < n_; ++c) {
    for (std::size_t k = 0; k < 4; ++k) q[first_[c] + k] += p * wu_[c][k];
    p *= decay_[c];
  }
  return q;
}

void ExpIntegrals::moment(std::span<const cd> f, std::span<cd> out) const {
  out[0] = 0.0;
  for (std::size_t c = 0; c + 1 < n_; ++c) {
    const cd* fs = f.data() + first_[c];
    const auto& w = wm_[c];
    out[c + 1] = out[c] + (w[0] * fs[0] + w[1] * fs[1] + w[2] * fs[2] + w[3] * fs[3]);
  }
}

PoissonSolver::PoissonSolver(std::shared_ptr<const GradedGrid> grid, int truncation)
    : grid_(std::move(grid)), k_(truncation) {
  if (!grid_) throw DomainError("PoissonSolver: null grid");
  if (truncation < 0) throw DomainError("PoissonSolver: negative truncation");
  ints_.reserve(static_cast<std::size_t>(k_ + 1));
  for (int a = 0; a <= k_; ++a) ints_.emplace_back(*grid_, a);
}

namespace {

StreamFunctionMode solve_with(const ExpIntegrals& ints, const GradedGrid& grid, std::span<const cd> omega,
                              int alpha) {
  const std::size_t n = grid.size();
  if (omega.size() != n) throw DomainError("solve_poisson_mode: profile/grid size mismatch");
  check_finite(omega, "solve_poisson_mode");
  StreamFunctionMode s;
  s.alpha = alpha;
  s.phi.assign(n, cd{});
  s.dphi.assign(n, cd{});
  Profile lo(n), up(n);
  ints.upper(omega, up);
  if (ints.abs_alpha() == 0) {
    // phi(0) = 0 and phi'(inf) = 0: phi' = -int_z^inf omega
    ints.moment(omega, lo);
    for (std::size_t j = 0; j < n; ++j) {
      s.dphi[j] = -up[j];
      s.phi[j] = -(lo[j] + grid.nodes[j] * up[j]);
    }
  } else {
    ints.lower(omega, lo);
    const double a = ints.abs_alpha();
    const cd j0 = up[0];
    for (std::size_t j = 0; j < n; ++j) {
      const double e = std::exp(-a * grid.nodes[j]);
      s.phi[j] = -(lo[j] + up[j] - e * j0) / (2.0 * a);
      s.dphi[j] = 0.5 * (lo[j] - up[j] - e * j0);
    }
  }
  s.phi[0] = 0.0;
  return s;
}

}  // namespace

StreamFunctionMode PoissonSolver::solve(std::span<const cd> omega, int alpha) const {
  if (std::abs(alpha) > k_) throw DomainError("solve_poisson_mode: mode beyond solver truncation");
  return solve_with(integrals(std::abs(alpha)), *grid_, omega, alpha);
}

cd PoissonSolver::trace(std::span<const cd> n_alpha, int alpha) const {
  if (n_alpha.size() != grid_->size()) throw DomainError("boundary_source_trace: profile/grid size mismatch");
  check_finite(n_alpha, "boundary_source_trace");
  Profile up(grid_->size());
  integrals(std::abs(alpha)).upper(n_alpha, up);
  return -up[0];
}

StreamFunctionMode solve_poisson_mode(std::span<const cd> omega, int alpha, const GradedGrid& grid) {
  return solve_with(ExpIntegrals(grid, std::abs(alpha)), grid, omega, alpha);
}

double poisson_residual(const StreamFunctionMode& s, std::span<const cd> omega, const GradedGrid& grid) {
  const auto& z = grid.nodes;
  const double a2 = static_cast<double>(s.alpha) * s.alpha;
  double r = 0.0;
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double hm = z[i] - z[i - 1];
    const double hp = z[i + 1] - z[i];
    const cd d2 = 2.0 * (s.phi[i + 1] * hm - s.phi[i] * (hm + hp) + s.phi[i - 1] * hp) / (hm * hp * (hm + hp));
    r = std::max(r, std::abs(d2 - a2 * s.phi[i] - omega[i]));
  }
  return r;
}

Velocity velocity_from_vorticity(const SpectralField& omega) {
  const PoissonSolver solver(omega.grid_ptr(), omega.truncation());
  return velocity_from_vorticity(omega, solver);
}

Velocity velocity_from_vorticity(const SpectralField& omega, const PoissonSolver& solver) {
  Velocity u{omega.zeros_like(), omega.zeros_like()};
  const int k = omega.truncation();
  for (int a = -k; a <= k; ++a) {
    if (omega.reality() && a < 0) continue;
    const auto s = solver.solve(omega.mode(a), a);
    auto& u1 = u.u1.mode(a);
    auto& u2 = u.u2.mode(a);
    const cd fac(0.0, -static_cast<double>(a));
    for (std::size_t j = 0; j < s.phi.size(); ++j) {
      u1[j] = s.dphi[j];
      u2[j] = fac * s.phi[j];
    }
    u2[0] = 0.0;
  }
  if (omega.reality()) {
    u.u1.enforce_reality();
    u.u2.enforce_reality();
  }
  return u;
}

double divergence_residual(const Velocity& u) {
  double r = 0.0;
  const int k = u.u1.truncation();
  for (int a = -k; a <= k; ++a) {
    const auto d = dz<cd>(u.u2.grid(), u.u2.mode(a));
    const auto& u1 = u.u1.mode(a);
    for (std::size_t j = 0; j < d.size(); ++j) r = std::max(r, std::abs(cd(0.0, a) * u1[j] + d[j]));
  }
  return r;
}

std::vector<cd> boundary_source_trace(const SpectralField& n) {
  const PoissonSolver solver(n.grid_ptr(), n.truncation());
  return boundary_source_trace(n, solver);
}

std::vector<cd> boundary_source_trace(const SpectralField& n, const PoissonSolver& solver) {
  const int k = n.truncation();
  std::vector<cd> g(static_cast<std::size_t>(2 * k + 1));
  for (int a = -k; a <= k; ++a) g[static_cast<std::size_t>(a + k)] = solver.trace(n.mode(a), a);
  return g;
}

std::vector<cd> dirichlet_to_neumann(std::span<const cd> h) {
  if (h.size() % 2 == 0) throw DomainError("dirichlet_to_neumann: expected 2K+1 trace values");
  const int k = static_cast<int>(h.size() / 2);
  std::vector<cd> out(h.size());
  for (int a = -k; a <= k; ++a) out[static_cast<std::size_t>(a + k)] = dirichlet_to_neumann(h[static_cast<std::size_t>(a + k)], a);
  return out;
}

}  // namespace hsns
