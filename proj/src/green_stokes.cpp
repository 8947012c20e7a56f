#include "hsns/green_stokes.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <random>

#include "hsns/error.hpp"
#include "hsns/special.hpp"

namespace hsns {

using cplx = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

void check_time_args(double nu, double t, double y, double z, const char* who) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError(std::string(who) + ": nu must be positive");
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError(std::string(who) + ": t must be positive");
  if (!(y >= 0.0) || !(z >= 0.0)) throw DomainError(std::string(who) + ": y, z must be >= 0");
}

template <typename F>
double gk(F&& f, double a, double b, int depth, double tol, double* err) {
  double e = 0.0;
  double l1 = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, static_cast<unsigned>(depth),
                                                                                 tol, &e, &l1);
  if (err) *err += e;
  return v;
}

}  // namespace

ResolventPoint make_resolvent_point(cplx lambda, int alpha, double nu) {
  if (!(nu > 0.0)) throw DomainError("resolvent: nu must be positive");
  const double a2nu = static_cast<double>(alpha) * alpha * nu;
  if (lambda == cplx(0.0, 0.0)) throw DomainError("resolvent: lambda at the pole 0");
  if (lambda.imag() == 0.0 && lambda.real() <= -a2nu) throw DomainError("resolvent: lambda on the branch cut");
  ResolventPoint p{lambda, alpha, nu, std::sqrt((lambda + a2nu) / nu)};
  return p;
}

cplx resolvent_heat(const ResolventPoint& p, double y, double z) {
  return (std::exp(-p.mu * std::abs(y - z)) + std::exp(-p.mu * (y + z))) / (2.0 * p.nu * p.mu);
}

cplx resolvent_residual(const ResolventPoint& p, double y, double z) {
  const double a = std::abs(p.alpha);
  if (a == 0.0) return 0.0;
  return a * (a + p.mu) / (p.lambda * p.mu) * std::exp(-p.mu * (y + z));
}

cplx resolvent_kernel(cplx lambda, int alpha, double nu, double y, double z) {
  if (!(y >= 0.0) || !(z >= 0.0)) throw DomainError("resolvent: y, z must be >= 0");
  const auto p = make_resolvent_point(lambda, alpha, nu);
  return resolvent_heat(p, y, z) + resolvent_residual(p, y, z);
}

double heat_kernel_neumann(double nu, int alpha, double t, double y, double z) {
  check_time_args(nu, t, y, z, "heat_kernel_neumann");
  const double tau = nu * t;
  const double a2 = static_cast<double>(alpha) * alpha;
  const double dm = y - z;
  const double dp = y + z;
  return (std::exp(-dm * dm / (4.0 * tau) - a2 * tau) + std::exp(-dp * dp / (4.0 * tau) - a2 * tau)) /
         std::sqrt(4.0 * kPi * tau);
}

double heat_kernel_neumann_dz(double nu, int alpha, double t, double y, double z) {
  check_time_args(nu, t, y, z, "heat_kernel_neumann_dz");
  const double tau = nu * t;
  const double a2 = static_cast<double>(alpha) * alpha;
  const double dm = y - z;
  const double dp = y + z;
  return (dm * std::exp(-dm * dm / (4.0 * tau) - a2 * tau) - dp * std::exp(-dp * dp / (4.0 * tau) - a2 * tau)) /
         (2.0 * tau * std::sqrt(4.0 * kPi * tau));
}

double residual_kernel(double nu, int alpha, double t, double y, double z) {
  check_time_args(nu, t, y, z, "residual_kernel");
  const double a = std::abs(alpha);
  if (a == 0.0) return 0.0;
  const double tau = nu * t;
  const double zeta = y + z;
  const double st = std::sqrt(tau);
  const double x = zeta / (2.0 * st) - a * st;
  if (x > 0.0) {
    const double e = -zeta * zeta / (4.0 * tau) - a * a * tau;
    return e < -745.0 ? 0.0 : a * erfcx(x) * std::exp(e);
  }
  return a * std::exp(-a * zeta) * std::erfc(x);
}

double residual_kernel_dz(double nu, int alpha, double t, double y, double z) {
  check_time_args(nu, t, y, z, "residual_kernel_dz");
  const double a = std::abs(alpha);
  if (a == 0.0) return 0.0;
  const double tau = nu * t;
  const double zeta = y + z;
  const double g = std::exp(-zeta * zeta / (4.0 * tau) - a * a * tau) / std::sqrt(kPi * tau);
  return -a * residual_kernel(nu, alpha, t, y, z) - a * g;
}

double residual_kernel_quadrature(double nu, int alpha, double t, double y, double z) {
  check_time_args(nu, t, y, z, "residual_kernel_quadrature");
  const double a = std::abs(alpha);
  if (a == 0.0) return 0.0;
  const double tau = nu * t;
  const double zeta = y + z;
  const double st = std::sqrt(tau);
  const double centre = 2.0 * a * tau;
  // e^{a(w - zeta)} G(tau, w) e^{-a^2 tau} = G(tau, w - 2 a tau) e^{-a zeta}
  auto integrand = [&](double w) {
    const double s = w - centre;
    return 2.0 * a * std::exp(-s * s / (4.0 * tau) - a * zeta) / std::sqrt(4.0 * kPi * tau);
  };
  const double lo = std::max(zeta, centre - 40.0 * st);
  const double hi = std::max(lo + 40.0 * st, centre + 40.0 * st);
  // split at the Gaussian centre so the adaptive rule sees the peak
  double total = 0.0;
  if (centre > lo && centre < hi) {
    total = gk(integrand, lo, centre, 20, 1e-14, nullptr) + gk(integrand, centre, hi, 20, 1e-14, nullptr);
  } else {
    total = gk(integrand, lo, hi, 20, 1e-14, nullptr);
  }
  return total;
}

double residual_kernel_reflection_full_line(double nu, int alpha, double t, double y, double z) {
  check_time_args(nu, t, y, z, "residual_kernel_reflection_full_line");
  const double a = std::abs(alpha);
  if (a == 0.0) return 0.0;
  const double tau = nu * t;
  const double zeta = y + z;
  const double st = std::sqrt(tau);
  return a * exp_erfc(a * zeta, zeta / (2.0 * st) + a * st);
}

double green_function(double nu, int alpha, double t, double y, double z) {
  return heat_kernel_neumann(nu, alpha, t, y, z) + residual_kernel(nu, alpha, t, y, z);
}

double green_function_dz(double nu, int alpha, double t, double y, double z) {
  return heat_kernel_neumann_dz(nu, alpha, t, y, z) + residual_kernel_dz(nu, alpha, t, y, z);
}

std::string to_string(ContourRegime r) {
  switch (r) {
    case ContourRegime::zero_mode: return "zero_mode";
    case ContourRegime::pencil: return "pencil";
    case ContourRegime::parabola: return "parabola";
    case ContourRegime::parabola_shifted: return "parabola_shifted";
  }
  return "unknown";
}

ContourResult green_contour_oracle(double nu, int alpha, double t, double y, double z, const ContourParams& params) {
  check_time_args(nu, t, y, z, "green_contour_oracle");
  if (!(params.M > 0.0)) throw DomainError("green_contour_oracle: M must be positive");
  ContourResult res;
  const double A = std::abs(alpha);
  const double tau = nu * t;
  const double zeta = y + z;
  const double a = zeta / (2.0 * nu * t);
  res.a = a;
  const double heat = heat_kernel_neumann(nu, alpha, t, y, z);
  if (A == 0.0) {
    res.total = heat;
    return res;
  }

  // e^{lambda t} R_lambda, R_lambda = A e^{-mu zeta} / (nu mu (mu - A))
  auto laplace_integrand = [&](cplx lam) {
    const cplx mu = std::sqrt((lam + A * A * nu) / nu);
    return A * std::exp(lam * t - mu * zeta) / (nu * mu * (mu - A));
  };

  const double log_tail = std::log(1.0 / params.tail_tol) + 12.0;
  double b_max = params.b_max > 0.0 ? params.b_max : std::sqrt(log_tail / tau);
  double err = 0.0;
  double value = 0.0;

  auto check_tail = [&](auto&& leg) {
    // peak over a coarse sample against the value at b_max
    for (int grow = 0; grow < 8; ++grow) {
      double peak = 0.0;
      for (int i = 0; i <= 256; ++i) peak = std::max(peak, std::abs(leg(b_max * i / 256.0)));
      const double end = std::abs(leg(b_max));
      if (!(peak > 0.0) || end <= params.tail_tol * peak) return;
      if (params.b_max > 0.0) break;
      b_max *= 1.5;
    }
    throw NumericalError("green_contour_oracle: tail criterion unmet at b_max = " + std::to_string(b_max));
  };

  if (A * A * nu <= 1.0) {
    res.regime = ContourRegime::pencil;
    const double c = -0.5 * nu * A * A + nu * a * a;
    const double M = params.M;
    auto leg = [&](double b) {
      const cplx w(a, b);
      const cplx lam = -0.5 * nu * A * A + nu * w * w + cplx(0.0, M);
      const cplx dl = 2.0 * cplx(0.0, nu) * w;
      return (laplace_integrand(lam) * dl).imag() / kPi;
    };
    auto arc = [&](double th) {
      const cplx e = std::polar(1.0, th);
      return (laplace_integrand(c + M * e) * M * e).real() / kPi;
    };
    check_tail(leg);
    // the leg has its Gaussian scale ~ (nu t)^{-1/2}; split for the adaptive rule
    const double s = 1.0 / std::sqrt(tau);
    double lo = 0.0;
    for (double hi : {std::min(s, b_max), std::min(8.0 * s, b_max), b_max}) {
      if (hi > lo) {
        value += gk(leg, lo, hi, params.max_depth, params.tol, &err);
        lo = hi;
      }
    }
    value += gk(arc, 0.0, 0.5 * kPi, params.max_depth, params.tol, &err);
  } else if (std::abs(a - A) >= 0.5 * A) {
    res.regime = ContourRegime::parabola;
    // mu = a + i b: the phase cancels and the integrand is real
    const double d = a - A;
    const double pref = 2.0 * A / kPi * std::exp(-tau * (a * a + A * A));
    auto leg = [&](double b) { return pref * std::exp(-tau * b * b) * d / (d * d + b * b); };
    check_tail(leg);
    double lo = 0.0;
    for (double hi : {std::min(std::abs(d), b_max), std::min(1.0 / std::sqrt(tau), b_max), b_max}) {
      if (hi > lo) {
        value += gk(leg, lo, hi, params.max_depth, params.tol, &err);
        lo = hi;
      }
    }
    if (a < A) {
      res.residue = 2.0 * A * std::exp(-A * zeta);
      value += res.residue;
    }
  } else {
    res.regime = ContourRegime::parabola_shifted;
    auto leg = [&](double b) {
      const cplx w(a, b);
      const cplx lam = -0.125 * nu * A * A + nu * w * w;
      const cplx dl = 2.0 * cplx(0.0, nu) * w;
      return (laplace_integrand(lam) * dl).imag() / kPi;
    };
    check_tail(leg);
    const double s = 1.0 / std::sqrt(tau);
    double lo = 0.0;
    for (double hi : {std::min(A, b_max), std::min(s, b_max), b_max}) {
      if (hi > lo) {
        value += gk(leg, lo, hi, params.max_depth, params.tol, &err);
        lo = hi;
      }
    }
  }
  if (!std::isfinite(value)) throw NumericalError("green_contour_oracle: non-finite integral");
  res.residual = value;
  res.total = heat + value;
  res.error_estimate = err;
  res.b_max = b_max;
  return res;
}

// ---------------------------------------------------------------------------

namespace {

struct BoundSample {
  double deriv;  // |dz^k R|
  double mu_f;
  double zeta;
  double tau;
  double a2tau;
};

std::vector<BoundSample> bound_samples(const BoundSweep& sw, int k, double extent) {
  std::vector<BoundSample> out;
  for (double nu : sw.nus) {
    for (int alpha : sw.alphas) {
      const double A = std::abs(alpha);
      const double mu_f = A + 1.0 / std::sqrt(nu);
      for (int it = 0; it < sw.n_t; ++it) {
        const double t = sw.n_t == 1 ? sw.t_min
                                     : sw.t_min * std::pow(sw.t_max / sw.t_min, static_cast<double>(it) / (sw.n_t - 1));
        const double tau = nu * t;
        const double zeta_hi = extent * (2.0 * A * tau + 12.0 * std::sqrt(tau) + 12.0 / mu_f);
        for (int j = 0; j <= sw.n_zeta; ++j) {
          const double s = static_cast<double>(j) / sw.n_zeta;
          const double zeta = zeta_hi * s * s;
          const double r = (k == 0) ? residual_kernel(nu, alpha, t, 0.0, zeta) : residual_kernel_dz(nu, alpha, t, 0.0, zeta);
          out.push_back({std::abs(r), mu_f, zeta, tau, A * A * tau});
        }
      }
    }
  }
  return out;
}

double envelope(const BoundSample& s, int k, double theta) {
  const double p = k + 1.0;
  return std::pow(s.mu_f, p) * std::exp(-theta * s.mu_f * s.zeta) +
         std::pow(s.tau, -0.5 * p) * std::exp(-theta * s.zeta * s.zeta / s.tau - s.a2tau / 8.0);
}

double max_ratio(const std::vector<BoundSample>& samples, int k, double theta) {
  double m = 0.0;
  for (const auto& s : samples) {
    if (s.deriv == 0.0) continue;
    const double e = envelope(s, k, theta);
    m = std::max(m, e > 0.0 ? s.deriv / e : std::numeric_limits<double>::infinity());
  }
  return m;
}

std::vector<double> theta_ladder(const BoundSweep& sw) {
  if (!sw.theta_candidates.empty()) return sw.theta_candidates;
  std::vector<double> th;
  for (int i = 0; i < 40; ++i) th.push_back(0.005 * std::pow(2000.0, i / 39.0));
  return th;
}

}  // namespace

double bound_ratio(const BoundSweep& sweep, int k, double theta0) {
  return max_ratio(bound_samples(sweep, k, sweep.zeta_extent), k, theta0);
}

BoundReport verify_pointwise_bounds(const BoundSweep& sweep, int k) {
  if (k != 0 && k != 1) throw DomainError("verify_pointwise_bounds: k must be 0 or 1");
  BoundReport rep;
  rep.k = k;
  rep.sweep = sweep;
  const auto base = bound_samples(sweep, k, sweep.zeta_extent);
  const auto wide = bound_samples(sweep, k, 2.0 * sweep.zeta_extent);
  rep.n_samples = base.size();
  rep.mu_f_min = std::numeric_limits<double>::infinity();
  for (const auto& s : base) {
    rep.mu_f_min = std::min(rep.mu_f_min, s.mu_f);
    rep.mu_f_max = std::max(rep.mu_f_max, s.mu_f);
  }
  for (double th : theta_ladder(sweep)) {
    const double c = max_ratio(base, k, th);
    const double cw = max_ratio(wide, k, th);
    rep.theta_scan.emplace_back(th, c);
    // admissible: moderate constant that does not grow once the zeta range is extended
    const bool ok = std::isfinite(c) && c <= 1e6 && cw <= 1.2 * c + 1e-300;
    if (ok && th > rep.theta0) {
      rep.theta0 = th;
      rep.C = c;
      rep.found = true;
    }
  }
  if (rep.found) rep.max_ratio = rep.C > 0.0 ? max_ratio(base, k, rep.theta0) / rep.C : 0.0;
  return rep;
}

nlohmann::json to_json(const BoundReport& r) {
  nlohmann::json scan = nlohmann::json::array();
  for (const auto& [th, c] : r.theta_scan) scan.push_back({th, std::isfinite(c) ? c : -1.0});
  return {
      {"k", r.k},
      {"found", r.found},
      {"theta0", r.theta0},
      {"C", r.C},
      {"mu_f_min", r.mu_f_min},
      {"mu_f_max", r.mu_f_max},
      {"max_ratio", r.max_ratio},
      {"n_samples", r.n_samples},
      {"ranges",
       {{"nu", r.sweep.nus},
        {"alpha", r.sweep.alphas},
        {"t_min", r.sweep.t_min},
        {"t_max", r.sweep.t_max},
        {"n_t", r.sweep.n_t},
        {"n_zeta", r.sweep.n_zeta},
        {"zeta_extent", r.sweep.zeta_extent}}},
      {"theta_scan", scan},
  };
}

namespace {

bool close(double a, double b, double rel, double abs_tol) {
  const double d = std::abs(a - b);
  return d <= abs_tol || d <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace

GreenCrossCheck cross_validate_green(std::size_t n_samples, std::uint64_t seed, double rel_tol, double abs_tol) {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw DomainError("cross_validate_green: tolerances must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GreenCrossCheck r;
  r.rel_tol = rel_tol;
  r.abs_tol = abs_tol;
  const double floor = abs_tol / rel_tol;
  for (std::size_t i = 0; i < n_samples; ++i) {
    GreenSample s;
    if (i % 2 == 0) {
      // alpha^2 nu <= 1
      s.alpha = static_cast<int>(u(rng) * 17.0);
      const double hi = s.alpha > 0 ? std::min(1.0, 1.0 / (s.alpha * s.alpha)) : 1.0;
      s.nu = hi * std::pow(10.0, -3.0 * u(rng));
    } else {
      s.alpha = 1 + static_cast<int>(u(rng) * 16.0);
      const double lo = 1.0 / (s.alpha * s.alpha);
      s.nu = lo * std::pow(10.0, std::log10(std::max(1.0, 1.0 / lo)) * u(rng));
    }
    s.t = std::pow(10.0, -3.0 + 3.0 * u(rng));
    const double tau = s.nu * s.t;
    const double length = 4.0 * std::max(std::sqrt(tau), s.alpha > 0 ? 1.0 / s.alpha : 1.0);
    s.y = u(rng) * length;
    s.z = u(rng) * length;
    (s.alpha * s.alpha * s.nu <= 1.0 ? r.n_small_alpha2nu : r.n_large_alpha2nu)++;
    s.closed = residual_kernel(s.nu, s.alpha, s.t, s.y, s.z);
    s.quadrature = residual_kernel_quadrature(s.nu, s.alpha, s.t, s.y, s.z);
    try {
      const auto c = green_contour_oracle(s.nu, s.alpha, s.t, s.y, s.z);
      s.contour = c.residual;
      s.regime = c.regime;
    } catch (const NumericalError&) {
      s.contour = std::numeric_limits<double>::quiet_NaN();
    }
    s.agree = close(s.closed, s.quadrature, rel_tol, abs_tol) && close(s.closed, s.contour, rel_tol, abs_tol) &&
              close(s.quadrature, s.contour, rel_tol, abs_tol);
    const double scale = std::max(std::abs(s.closed), floor);
    r.max_rel_quadrature = std::max(r.max_rel_quadrature, std::abs(s.closed - s.quadrature) / scale);
    const double dc = std::abs(s.closed - s.contour) / scale;
    r.max_rel_contour = std::isfinite(dc) ? std::max(r.max_rel_contour, dc) : std::numeric_limits<double>::infinity();
    if (!s.agree) ++r.disagreements;
    r.samples.push_back(s);
  }
  return r;
}

nlohmann::json to_json(const GreenCrossCheck& r) {
  return {{"n_samples", r.samples.size()},
          {"n_small_alpha2nu", r.n_small_alpha2nu},
          {"n_large_alpha2nu", r.n_large_alpha2nu},
          {"max_rel_quadrature", r.max_rel_quadrature},
          {"max_rel_contour", r.max_rel_contour},
          {"disagreements", r.disagreements},
          {"rel_tol", r.rel_tol},
          {"abs_tol", r.abs_tol}};
}

}  // namespace hsns
