#include "hsns/stokes_semigroup.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "hsns/biot_savart.hpp"
#include "hsns/error.hpp"
#include "hsns/quadrature.hpp"
#include "hsns/special.hpp"

namespace hsns {

namespace {

constexpr double kWindow = 14.0;  // Gaussian tails beyond 14 sqrt(tau) are below 1e-21

// G_alpha(t, y; z) with the constants of one (alpha, nu t) pair hoisted.
struct Kernel {
  double tau, st, A, norm, zeta_r;

  Kernel(int abs_alpha, double nu, double t)
      : tau(nu * t),
        st(std::sqrt(nu * t)),
        A(abs_alpha),
        norm(std::exp(-A * A * tau) / std::sqrt(4.0 * std::numbers::pi * tau)),
        zeta_r(2.0 * A * tau + kWindow * st) {}

  double residual(double zeta) const {
    if (A == 0.0 || zeta >= zeta_r) return 0.0;
    const double x = zeta / (2.0 * st) - A * st;
    if (x > 0.0) return A * erfcx(x) * std::exp(-zeta * zeta / (4.0 * tau) - A * A * tau);
    return A * std::exp(-A * zeta) * std::erfc(x);
  }

  double operator()(double y, double z) const {
    const double dm = y - z;
    const double dp = y + z;
    return norm * (std::exp(-dm * dm / (4.0 * tau)) + std::exp(-dp * dp / (4.0 * tau))) + residual(dp);
  }
};

// Accumulate row[j] += int G(y; z) L_j(y) dy over the kernel support.
void assemble_row(const GradedGrid& grid, const Kernel& k, double z, double* row) {
  const double L = kWindow * k.st;
  const double zmax = grid.z_max;
  std::array<std::pair<double, double>, 3> iv{};
  std::size_t niv = 0;
  iv[niv++] = {std::max(0.0, z - L), std::min(zmax, z + L)};
  if (z < L) iv[niv++] = {0.0, std::min(zmax, L - z)};
  if (k.A > 0.0 && k.zeta_r > z) iv[niv++] = {0.0, std::min(zmax, k.zeta_r - z)};
  std::sort(iv.begin(), iv.begin() + static_cast<long>(niv));
  // merge overlapping intervals
  std::size_t m = 0;
  for (std::size_t i = 1; i < niv; ++i) {
    if (iv[i].first <= iv[m].second) {
      iv[m].second = std::max(iv[m].second, iv[i].second);
    } else {
      iv[++m] = iv[i];
    }
  }
  niv = niv ? m + 1 : 0;

  const auto& nodes = grid.nodes;
  const std::size_t n = grid.size();
  const double piece = 0.5 * k.st;
  for (std::size_t i = 0; i < niv; ++i) {
    const auto [lo, hi] = iv[i];
    if (!(hi > lo)) continue;
    auto it = std::upper_bound(nodes.begin(), nodes.end(), lo);
    std::size_t c = (it == nodes.begin()) ? 0 : static_cast<std::size_t>(it - nodes.begin()) - 1;
    for (; c + 1 < n && nodes[c] < hi; ++c) {
      const double a = std::max(lo, nodes[c]);
      const double b = std::min(hi, nodes[c + 1]);
      if (!(b > a)) continue;
      const double len = b - a;
      const auto pieces = static_cast<std::size_t>(std::max({1.0, std::ceil(len / piece), std::ceil(k.A * len / 2.0)}));
      const std::size_t first = stencil_start(c, n);
      gl::for_each_point(a, b, pieces, [&](double y, double w) {
        const double kw = w * k(y, z);
        if (kw == 0.0) return;
        const auto basis = stencil_basis(grid, first, y);
        for (std::size_t q = 0; q < 4; ++q) row[first + q] += kw * basis[q];
      });
    }
  }
}

void check_nu_t(double nu, double t, const char* who) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError(std::string(who) + ": nu must be positive");
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError(std::string(who) + ": t must be positive");
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// M += v c^T with c = target q^T - q^T M and q^T v = 1.
void fix_matrix(KernelMatrix& m, const std::vector<double>& q, double target, std::vector<double> v) {
  const std::size_t n = m.n;
  const double qv = dot(q, v);
  if (!(std::abs(qv) > 0.0)) return;
  for (auto& x : v) x /= qv;
  std::vector<double> c(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += q[i] * m.a[i * n + j];
    c[j] = target * q[j] - s;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (v[i] == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) m.a[i * n + j] += v[i] * c[j];
  }
}

void fix_vector(std::vector<double>& w, const std::vector<double>& q, double target, std::vector<double> v) {
  const double qv = dot(q, v);
  if (!(std::abs(qv) > 0.0)) return;
  const double defect = (target - dot(q, w)) / qv;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] += defect * v[i];
}

}  // namespace

void StokesStep::make_conservative(ModeOps& op, const std::vector<double>& q, double dt,
                                   const std::vector<double>& boundary_response) {
  // corrections live on the boundary-layer profiles, which satisfy the
  // homogeneous flux condition, so the boundary identity is unaffected
  fix_matrix(op.S, q, 1.0, boundary_response);
  fix_matrix(op.phi0, q, 0.5 * dt, op.w0);
  fix_matrix(op.phi1, q, 0.5 * dt, op.w1);
  fix_vector(op.w0, q, 0.5 * dt, op.w0);
  fix_vector(op.w1, q, 0.5 * dt, op.w1);
}

void KernelMatrix::apply(std::span<const cd> in, std::span<cd> out) const {
  std::fill(out.begin(), out.end(), cd{});
  apply_add(in, out);
}

void KernelMatrix::apply_add(std::span<const cd> in, std::span<cd> out) const {
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = a.data() + i * n;
    double re = 0.0;
    double im = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      re += r[j] * in[j].real();
      im += r[j] * in[j].imag();
    }
    out[i] += cd(re, im);
  }
}

KernelMatrix semigroup_matrix(const GradedGrid& grid, int abs_alpha, double nu, double t) {
  check_nu_t(nu, t, "semigroup_matrix");
  const std::size_t n = grid.size();
  KernelMatrix m{n, std::vector<double>(n * n, 0.0)};
  const Kernel k(std::abs(abs_alpha), nu, t);
  for (std::size_t i = 0; i < n; ++i) assemble_row(grid, k, grid.nodes[i], m.a.data() + i * n);
  return m;
}

std::vector<double> trace_kernel(const GradedGrid& grid, int abs_alpha, double nu, double t) {
  check_nu_t(nu, t, "trace_kernel");
  const Kernel k(std::abs(abs_alpha), nu, t);
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = k(0.0, grid.nodes[i]);
  return out;
}

DuhamelSchedule DuhamelSchedule::uniform(double T, double dt) {
  if (!(T > 0.0) || !(dt > 0.0)) throw DomainError("DuhamelSchedule: T and dt must be positive");
  const auto steps = static_cast<std::size_t>(std::llround(std::ceil(T / dt - 1e-9)));
  DuhamelSchedule s;
  s.times.resize(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) s.times[i] = std::min(T, dt * static_cast<double>(i));
  s.times.back() = T;
  return s;
}

void DuhamelSchedule::validate() const {
  if (times.empty() || times.front() != 0.0) throw DomainError("DuhamelSchedule: must start at t = 0");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw DomainError("DuhamelSchedule: times must increase strictly");
  }
  if (n_time_quad < 4) throw DomainError("DuhamelSchedule: n_time_quad must be >= 4");
}

StokesStep::StokesStep(std::shared_ptr<const GradedGrid> grid, double nu, double dt, int truncation, int n_time_quad,
                       bool conservative)
    : grid_(std::move(grid)), nu_(nu), dt_(dt), k_(truncation) {
  if (!grid_) throw DomainError("StokesStep: null grid");
  check_nu_t(nu, dt, "StokesStep");
  const std::size_t n = grid_->size();
  const auto rule = gl::legendre(n_time_quad);
  const double umax = std::sqrt(dt);
  ops_.resize(static_cast<std::size_t>(k_ + 1));
  for (int a = 0; a <= k_; ++a) {
    auto& op = ops_[static_cast<std::size_t>(a)];
    op.S = semigroup_matrix(*grid_, a, nu, dt);
    op.phi0 = KernelMatrix{n, std::vector<double>(n * n, 0.0)};
    op.phi1 = KernelMatrix{n, std::vector<double>(n * n, 0.0)};
    // int_0^dt S(r) l(r) dr with r = u^2: smooth in u even for data
    // violating the boundary condition
    for (std::size_t q = 0; q < rule.x.size(); ++q) {
      const double u = 0.5 * umax * (rule.x[q] + 1.0);
      const double r = u * u;
      const double wq = 0.5 * umax * rule.w[q] * 2.0 * u;
      const auto s = semigroup_matrix(*grid_, a, nu, r);
      const double c0 = wq * r / dt;
      const double c1 = wq * (1.0 - r / dt);
      for (std::size_t e = 0; e < n * n; ++e) {
        op.phi0.a[e] += c0 * s.a[e];
        op.phi1.a[e] += c1 * s.a[e];
      }
    }
    op.w0.assign(n, 0.0);
    op.w1.assign(n, 0.0);
    const Kernel kmax(a, nu, dt);
    for (std::size_t i = 0; i < n; ++i) {
      const double z = grid_->nodes[i];
      if (z > kmax.zeta_r && z > kWindow * kmax.st) continue;
      for (int which = 0; which < 2; ++which) {
        auto f = [&](double uu) {
          if (uu <= 0.0) return 0.0;
          const double r = uu * uu;
          const Kernel k(a, nu, r);
          const double l = which == 0 ? r / dt : 1.0 - r / dt;
          return k(0.0, z) * l * 2.0 * uu;
        };
        double err = 0.0;
        const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, umax, 15, 1e-12, &err);
        (which == 0 ? op.w0 : op.w1)[i] = v;
      }
    }
    if (conservative) make_conservative(op, ExpIntegrals(*grid_, a).wall_weights(), dt, trace_kernel(*grid_, a, nu, dt));
  }
}

SpectralField StokesStep::propagate(const SpectralField& w) const {
  return step(w, nullptr, nullptr, {}, {});
}

SpectralField StokesStep::step(const SpectralField& w, const SpectralField* f0, const SpectralField* f1,
                               std::span<const cd> g0, std::span<const cd> g1) const {
  if (w.truncation() > k_ || w.n_nodes() != grid_->size()) throw DomainError("StokesStep: field shape mismatch");
  if ((f0 && !f0->same_shape(w)) || (f1 && !f1->same_shape(w))) throw DomainError("StokesStep: source shape mismatch");
  const int k = w.truncation();
  const auto ng = static_cast<std::size_t>(2 * k + 1);
  if ((!g0.empty() && g0.size() != ng) || (!g1.empty() && g1.size() != ng)) {
    throw DomainError("StokesStep: trace size mismatch");
  }
  const bool real = w.reality() && (!f0 || f0->reality()) && (!f1 || f1->reality());
  SpectralField out = w.zeros_like();
  for (int a = -k; a <= k; ++a) {
    if (real && a < 0) continue;
    const auto& op = ops(std::abs(a));
    auto& dst = out.mode(a);
    op.S.apply(w.mode(a), dst);
    if (f0) op.phi0.apply_add(f0->mode(a), dst);
    if (f1) op.phi1.apply_add(f1->mode(a), dst);
    const auto idx = static_cast<std::size_t>(a + k);
    const cd ga = g0.empty() ? cd{} : g0[idx];
    const cd gb = g1.empty() ? cd{} : g1[idx];
    if (ga != cd{} || gb != cd{}) {
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] -= op.w0[j] * ga + op.w1[j] * gb;
    }
  }
  if (real) out.enforce_reality();
  out.set_reality(real);
  return out;
}

void StokesStep::add_end_sources(const SpectralField& f1, std::span<const cd> g1, SpectralField& out) const {
  if (!f1.same_shape(out)) throw DomainError("StokesStep: source shape mismatch");
  const int k = out.truncation();
  const bool real = out.reality() && f1.reality();
  for (int a = -k; a <= k; ++a) {
    if (real && a < 0) continue;
    const auto& op = ops(std::abs(a));
    auto& dst = out.mode(a);
    op.phi1.apply_add(f1.mode(a), dst);
    if (!g1.empty()) {
      const cd gb = g1[static_cast<std::size_t>(a + k)];
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] -= op.w1[j] * gb;
    }
  }
  if (real) out.enforce_reality();
  out.set_reality(real);
}

StokesPropagator::StokesPropagator(std::shared_ptr<const GradedGrid> grid, double nu, int truncation, int n_time_quad,
                                   bool conservative)
    : grid_(std::move(grid)), nu_(nu), k_(truncation), nq_(n_time_quad), conservative_(conservative) {}

const StokesStep& StokesPropagator::step(double dt) {
  auto& slot = cache_[dt];
  if (!slot) slot = std::make_unique<StokesStep>(grid_, nu_, dt, k_, nq_, conservative_);
  return *slot;
}

SpectralField apply_semigroup(const SpectralField& w, double nu, double t) {
  if (t < 0.0 || !std::isfinite(t)) throw DomainError("apply_semigroup: t must be >= 0");
  if (t == 0.0) return w;
  check_nu_t(nu, t, "apply_semigroup");
  SpectralField out = w.zeros_like();
  const int k = w.truncation();
  std::vector<KernelMatrix> mats(static_cast<std::size_t>(k + 1));
  for (int a = -k; a <= k; ++a) {
    if (w.reality() && a < 0) continue;
    auto& m = mats[static_cast<std::size_t>(std::abs(a))];
    if (m.n == 0) m = semigroup_matrix(w.grid(), std::abs(a), nu, t);
    m.apply(w.mode(a), out.mode(a));
  }
  if (w.reality()) out.enforce_reality();
  return out;
}

SpectralField apply_trace_operator(std::span<const cd> g, std::shared_ptr<const GradedGrid> grid, int truncation,
                                   double nu, double t) {
  if (!(t > 0.0)) throw DomainError("apply_trace_operator: t must be positive");
  if (g.size() != static_cast<std::size_t>(2 * truncation + 1)) throw DomainError("apply_trace_operator: trace size mismatch");
  SpectralField out(grid, truncation, false);
  for (int a = -truncation; a <= truncation; ++a) {
    const auto kern = trace_kernel(*grid, std::abs(a), nu, t);
    const cd ga = g[static_cast<std::size_t>(a + truncation)];
    auto& dst = out.mode(a);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = kern[j] * ga;
  }
  out.set_reality(out.reality_defect() <= 1e-12);
  return out;
}

double boundary_flux_residual(const SpectralField& w, double nu, std::span<const cd> g) {
  const int k = w.truncation();
  const auto& z = w.grid().nodes;
  const double h1 = z[1] - z[0];
  const double h2 = z[2] - z[0];
  double r = 0.0;
  for (int a = -k; a <= k; ++a) {
    const auto& f = w.mode(a);
    const cd d = f[0] * (-(h1 + h2) / (h1 * h2)) + f[1] * (h2 / (h1 * (h2 - h1))) + f[2] * (-h1 / (h2 * (h2 - h1)));
    const cd flux = nu * (d + static_cast<double>(std::abs(a)) * f[0]);
    const cd ga = g.empty() ? cd{} : g[static_cast<std::size_t>(a + k)];
    r = std::max(r, std::abs(flux - ga));
  }
  return r;
}

StokesTrajectory duhamel_solve_stokes(const SpectralField& w0, const ForcingFn& f, const TraceFn& g, double nu,
                                      const DuhamelSchedule& schedule, bool conservative) {
  schedule.validate();
  StokesPropagator prop(w0.grid_ptr(), nu, w0.truncation(), schedule.n_time_quad, conservative);
  StokesTrajectory traj;
  traj.times.push_back(0.0);
  traj.fields.push_back(w0);
  traj.bc_residual.push_back(0.0);
  auto check_shape = [&](const SpectralField& s) {
    if (!s.same_shape(w0)) throw DomainError("duhamel_solve_stokes: forcing does not match the initial field");
  };
  std::optional<SpectralField> f_prev;
  std::vector<cd> g_prev;
  if (f) {
    f_prev = f(0.0);
    check_shape(*f_prev);
  }
  if (g) g_prev = g(0.0);
  for (std::size_t i = 1; i < schedule.times.size(); ++i) {
    const double t = schedule.times[i];
    const auto& st = prop.step(t - schedule.times[i - 1]);
    std::optional<SpectralField> f_next;
    std::vector<cd> g_next;
    if (f) {
      f_next = f(t);
      check_shape(*f_next);
    }
    if (g) g_next = g(t);
    auto next = st.step(traj.fields.back(), f_prev ? &*f_prev : nullptr, f_next ? &*f_next : nullptr, g_prev, g_next);
    traj.bc_residual.push_back(boundary_flux_residual(next, nu, g_next));
    traj.times.push_back(t);
    traj.fields.push_back(std::move(next));
    f_prev = std::move(f_next);
    g_prev = std::move(g_next);
  }
  return traj;
}

}  // namespace hsns
