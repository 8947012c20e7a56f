#include "hsns/ns_solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "hsns/error.hpp"

namespace hsns {

namespace {

/// Picard failure carrying the iteration history.
class PicardError : public NumericalError {
 public:
  PicardError(const std::string& what, PicardReport rep, bool non_contraction)
      : NumericalError(what), report(std::move(rep)), non_contracting(non_contraction) {}
  PicardReport report;
  bool non_contracting;
};

double sup_on_circle(const std::vector<cd>& modes, std::size_t nx) {
  // modes indexed alpha + K
  const int k = static_cast<int>(modes.size() / 2);
  double m = 0.0;
  for (std::size_t i = 0; i < nx; ++i) {
    const double x = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(nx);
    cd s = 0.0;
    for (int a = -k; a <= k; ++a) s += modes[static_cast<std::size_t>(a + k)] * std::polar(1.0, a * x);
    m = std::max(m, std::abs(s));
  }
  return m;
}

std::vector<cd> wall_values(const SpectralField& f) {
  const int k = f.truncation();
  std::vector<cd> v(static_cast<std::size_t>(2 * k + 1));
  for (int a = -k; a <= k; ++a) v[static_cast<std::size_t>(a + k)] = f.mode(a)[0];
  return v;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw ConfigError("nu must be >= 0");
  if (K < 0) throw ConfigError("K must be >= 0");
  if (!(picard_tol > 0.0)) throw ConfigError("picard_tol must be positive");
  if (picard_max < 1) throw ConfigError("picard_max must be >= 1");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(T > 0.0)) throw ConfigError("T must be positive");
  if (!(z_max > 0.0)) throw ConfigError("z_max must be positive");
  if (n_nodes < 32) throw ConfigError("n_nodes must be >= 32");
  if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0)) throw ConfigError("dealias_fraction must lie in (0, 1]");
  if (max_halvings < 0) throw ConfigError("max_halvings must be >= 0");
  if (nx != 0 && (!is_power_of_two(nx) || nx < static_cast<std::size_t>(std::max(4, 4 * K)))) {
    throw ConfigError("nx must be a power of two >= max(4, 4K)");
  }
}

double SolverConfig::resolved_delta_ref() const {
  if (delta_ref > 0.0) return delta_ref;
  if (nu > 0.0) return std::min(std::sqrt(nu), std::sqrt(nu * dt));
  return 0.05;
}

std::size_t SolverConfig::resolved_nx() const { return nx ? nx : default_nx(K); }

std::shared_ptr<const GradedGrid> SolverConfig::make_grid() const {
  return std::make_shared<const GradedGrid>(build_graded_grid(z_max, n_nodes, resolved_delta_ref()));
}

NonlinearOperator::NonlinearOperator(std::shared_ptr<const GradedGrid> grid, int truncation, std::size_t nx,
                                     double dealias_fraction)
    : poisson_(std::move(grid), truncation), nx_(nx) {
  kept_ = std::min(truncation, static_cast<int>(std::floor(dealias_fraction * static_cast<double>(nx) / 2.0)));
}

SpectralField NonlinearOperator::operator()(const SpectralField& w) const {
  if (!w.reality()) throw DomainError("nonlinear_term: field must be real");
  const int k = w.truncation();
  const Velocity u = velocity_from_vorticity(w, poisson_);
  const SpectralField wx = w.dx();
  SpectralField wz = w.zeros_like();
  for (int a = 0; a <= k; ++a) wz.mode(a) = dz<cd>(w.grid(), w.mode(a));
  wz.enforce_reality();

  const auto pu1 = inverse_transform(u.u1, nx_);
  const auto pu2 = inverse_transform(u.u2, nx_);
  const auto pwx = inverse_transform(wx, nx_);
  const auto pwz = inverse_transform(wz, nx_);
  PhysicalField prod(w.grid_ptr(), nx_);
  for (std::size_t i = 0; i < prod.values.size(); ++i) {
    prod.values[i] = pu1.values[i] * pwx.values[i] + pu2.values[i] * pwz.values[i];
  }
  SpectralField n = forward_transform(prod, k);
  for (int a = kept_ + 1; a <= k; ++a) {
    std::fill(n.mode(a).begin(), n.mode(a).end(), cd{});
    std::fill(n.mode(-a).begin(), n.mode(-a).end(), cd{});
  }
  return n;
}

SpectralField nonlinear_term(const SpectralField& w, double dealias_fraction) {
  const NonlinearOperator op(w.grid_ptr(), w.truncation(), default_nx(w.truncation()), dealias_fraction);
  return op(w);
}

double w11_norm(const SpectralField& w) {
  const int k = w.truncation();
  double s = 0.0;
  for (int a = -k; a <= k; ++a) {
    const auto& f = w.mode(a);
    const auto d = conormal_derivative(f, w.grid());
    s += (1.0 + std::abs(a)) * integrate_abs(w.grid(), f) + integrate_abs(w.grid(), d);
  }
  return s;
}

Velocity Trajectory::velocity(std::size_t i) const { return velocity_from_vorticity(vorticity.at(i)); }

double kinetic_energy(const Velocity& u) {
  const int k = u.u1.truncation();
  const auto& g = u.u1.grid();
  double e = 0.0;
  std::vector<double> sq(g.size());
  for (int a = -k; a <= k; ++a) {
    for (std::size_t j = 0; j < g.size(); ++j) sq[j] = std::norm(u.u1.mode(a)[j]) + std::norm(u.u2.mode(a)[j]);
    e += integrate(g, sq);
  }
  return std::numbers::pi * e;
}

void record_state(Trajectory& traj, double t, const SpectralField& w, const PoissonSolver& poisson, std::size_t nx,
                  const std::vector<cd>& u1_wall0) {
  const Velocity u = velocity_from_vorticity(w, poisson);
  auto u1w = wall_values(u.u1);
  traj.times.push_back(t);
  traj.vorticity.push_back(w);
  traj.u1_wall.push_back(sup_on_circle(u1w, nx));
  for (std::size_t i = 0; i < u1w.size(); ++i) u1w[i] -= u1_wall0[i];
  traj.no_slip_residual.push_back(sup_on_circle(u1w, nx));
  traj.u2_wall.push_back(sup_on_circle(wall_values(u.u2), nx));
  traj.divergence_residual.push_back(divergence_residual(u));
  traj.reality_defect.push_back(w.reality_defect());
  traj.energy.push_back(kinetic_energy(u));
}

NavierStokesSolver::NavierStokesSolver(const SolverConfig& config)
    : cfg_(config),
      grid_(config.make_grid()),
      nl_(grid_, config.K, config.resolved_nx(), config.dealias_fraction),
      prop_(grid_, config.nu > 0.0 ? config.nu : 1.0, config.K, config.n_time_quad) {
  cfg_.validate();
}

SpectralField NavierStokesSolver::zero_field() const { return SpectralField(grid_, cfg_.K, true); }

SpectralField NavierStokesSolver::source(const SpectralField& w) const {
  if (cfg_.linear) return w.zeros_like();
  return nl_(w);
}

SpectralField NavierStokesSolver::step_picard(const SpectralField& w, double dt, PicardReport& report) {
  if (!(cfg_.nu > 0.0)) throw DomainError("step_picard: nu must be positive");
  if (!w.all_finite()) throw NumericalError("step_picard: non-finite input field");
  if (w.truncation() != cfg_.K || (w.grid_ptr() != grid_ && w.grid().nodes != grid_->nodes)) {
    throw DomainError("step_picard: field does not match the solver grid");
  }
  const auto& st = prop_.step(dt);
  const auto& poisson = nl_.poisson();
  report = PicardReport{};

  // f = -N, g = [dz Delta^{-1} N](0)
  SpectralField f0 = source(w);
  const auto g0 = boundary_source_trace(f0, poisson);
  f0 *= -1.0;
  const SpectralField base = st.step(w, &f0, nullptr, g0, {});

  SpectralField prev = base;
  st.add_end_sources(f0, g0, prev);  // explicit predictor: sources frozen at t_n

  double last = 0.0;
  int rising = 0;
  for (int m = 1; m <= cfg_.picard_max; ++m) {
    SpectralField f1 = source(prev);
    const auto g1 = boundary_source_trace(f1, poisson);
    f1 *= -1.0;
    SpectralField next = base;
    st.add_end_sources(f1, g1, next);
    if (!next.all_finite()) throw PicardError("step_picard: non-finite iterate", report, true);
    const double inc = w11_norm(next - prev);
    const double size = w11_norm(next);
    report.iterations = m;
    report.increments.push_back(inc);
    if (m > 1) {
      const double rho = last > 0.0 ? inc / last : 0.0;
      report.contraction.push_back(rho);
      rising = rho >= 1.0 ? rising + 1 : 0;
    }
    last = inc;
    prev = std::move(next);
    if (inc <= cfg_.picard_tol * std::max(size, 1e-300) || inc == 0.0) {
      report.converged = true;
      return prev;
    }
    if (rising >= 3) throw PicardError("step_picard: iteration not contracting", report, true);
  }
  throw PicardError("step_picard: picard_max = " + std::to_string(cfg_.picard_max) + " exceeded (last increment " +
                        std::to_string(last) + ")",
                    report, false);
}

SpectralField NavierStokesSolver::advance(const SpectralField& w, double dt, PicardReport& total, int& halvings) {
  try {
    PicardReport rep;
    auto out = step_picard(w, dt, rep);
    total.iterations += rep.iterations;
    total.increments.insert(total.increments.end(), rep.increments.begin(), rep.increments.end());
    total.contraction.insert(total.contraction.end(), rep.contraction.begin(), rep.contraction.end());
    total.converged = true;
    return out;
  } catch (const PicardError& e) {
    if (!e.non_contracting || halvings >= cfg_.max_halvings) throw;
    ++halvings;
    const auto mid = advance(w, 0.5 * dt, total, halvings);
    return advance(mid, 0.5 * dt, total, halvings);
  }
}

namespace {

void check_initial(const SolverConfig& cfg, const GradedGrid& grid, const SpectralField& w0) {
  if (w0.truncation() != cfg.K) throw DomainError("initial field truncation does not match K");
  if (w0.grid().nodes != grid.nodes) throw DomainError("initial field grid does not match the solver grid");
  if (!w0.reality()) throw DomainError("initial field must be real");
  if (!w0.all_finite()) throw NumericalError("initial field has non-finite values");
}

std::vector<double> macro_times(const SolverConfig& cfg) { return DuhamelSchedule::uniform(cfg.T, cfg.dt).times; }

}  // namespace

Trajectory run_navier_stokes(const SolverConfig& config, const SpectralField& w0) {
  config.validate();
  if (!(config.nu > 0.0)) throw DomainError("run_navier_stokes: nu must be positive");
  NavierStokesSolver solver(config);
  check_initial(config, *solver.grid(), w0);
  // share the solver grid so every stored field has one grid object
  SpectralField w = solver.zero_field();
  for (int a = -config.K; a <= config.K; ++a) w.mode(a) = w0.mode(a);

  Trajectory traj;
  const auto& poisson = solver.nonlinearity().poisson();
  const std::size_t nx = solver.nonlinearity().nx();
  const auto u1_0 = wall_values(velocity_from_vorticity(w, poisson).u1);
  record_state(traj, 0.0, w, poisson, nx, u1_0);
  traj.iterations.push_back(0);
  traj.max_contraction.push_back(0.0);
  traj.halvings.push_back(0);

  const auto times = macro_times(config);
  for (std::size_t i = 1; i < times.size(); ++i) {
    PicardReport rep;
    int halvings = 0;
    try {
      w = solver.advance(w, times[i] - times[i - 1], rep, halvings);
    } catch (const std::exception& e) {
      traj.complete = false;
      traj.failure = "t = " + std::to_string(times[i - 1]) + ": " + e.what();
      return traj;
    }
    record_state(traj, times[i], w, poisson, nx, u1_0);
    traj.iterations.push_back(rep.iterations);
    traj.max_contraction.push_back(rep.contraction.empty() ? 0.0 : *std::max_element(rep.contraction.begin(), rep.contraction.end()));
    traj.halvings.push_back(halvings);
  }
  return traj;
}

Trajectory run_euler(const SolverConfig& config, const SpectralField& w0) {
  config.validate();
  if (config.nu != 0.0) throw DomainError("run_euler: nu must be 0");
  const auto grid = config.make_grid();
  check_initial(config, *grid, w0);
  const NonlinearOperator nl(grid, config.K, config.resolved_nx(), config.dealias_fraction);
  SpectralField w(grid, config.K, true);
  for (int a = -config.K; a <= config.K; ++a) w.mode(a) = w0.mode(a);

  Trajectory traj;
  const auto u1_0 = wall_values(velocity_from_vorticity(w, nl.poisson()).u1);
  record_state(traj, 0.0, w, nl.poisson(), nl.nx(), u1_0);
  traj.iterations.push_back(0);
  traj.max_contraction.push_back(0.0);
  traj.halvings.push_back(0);

  auto rhs = [&](const SpectralField& s) {
    SpectralField n = nl(s);
    n *= -1.0;
    return n;
  };
  auto rk4 = [&](const SpectralField& s, double h) {
    const auto k1 = rhs(s);
    const auto k2 = rhs(s + (0.5 * h) * k1);
    const auto k3 = rhs(s + (0.5 * h) * k2);
    const auto k4 = rhs(s + h * k3);
    SpectralField out = s;
    out.axpy(h / 6.0, k1);
    out.axpy(h / 3.0, k2);
    out.axpy(h / 3.0, k3);
    out.axpy(h / 6.0, k4);
    return out;
  };
  // blow-up of the mode norms signals a step beyond the stability limit
  std::function<SpectralField(const SpectralField&, double, int&)> advance = [&](const SpectralField& s, double h,
                                                                                 int& halvings) {
    auto out = rk4(s, h);
    const double before = w11_norm(s);
    const double after = out.all_finite() ? w11_norm(out) : std::numeric_limits<double>::infinity();
    if (std::isfinite(after) && after <= 2.0 * before + 1e-300) return out;
    if (halvings >= config.max_halvings) throw NumericalError("run_euler: step halving limit reached");
    ++halvings;
    const auto mid = advance(s, 0.5 * h, halvings);
    return advance(mid, 0.5 * h, halvings);
  };

  const auto times = macro_times(config);
  for (std::size_t i = 1; i < times.size(); ++i) {
    int halvings = 0;
    try {
      w = advance(w, times[i] - times[i - 1], halvings);
    } catch (const std::exception& e) {
      traj.complete = false;
      traj.failure = "t = " + std::to_string(times[i - 1]) + ": " + e.what();
      return traj;
    }
    record_state(traj, times[i], w, nl.poisson(), nl.nx(), u1_0);
    traj.iterations.push_back(1);
    traj.max_contraction.push_back(0.0);
    traj.halvings.push_back(halvings);
  }
  return traj;
}

}  // namespace hsns
