#include "hsns/bl_norms.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <cmath>
#include <limits>
#include <numbers>

#include "hsns/biot_savart.hpp"
#include "hsns/error.hpp"
#include "hsns/ns_solver.hpp"
#include "hsns/quadrature.hpp"

namespace hsns {

namespace {

constexpr double kMaxExponent = 700.0;

void check_rho(double rho, int k) {
  if (!std::isfinite(rho) || rho < 0.0) throw DomainError("analytic radius must be finite and non-negative");
  if (rho * k > kMaxExponent) {
    throw DomainError("e^{rho |alpha|} overflows: rho = " + std::to_string(rho) + " with K = " + std::to_string(k));
  }
}

double weight_exp(double rho, int alpha) { return std::exp(rho * std::abs(alpha)); }

std::vector<Profile> conormal_powers(const Profile& f, const GradedGrid& g, int k) {
  std::vector<Profile> d{f};
  for (int l = 1; l <= k; ++l) d.push_back(conormal_derivative(d.back(), g));
  return d;
}

}  // namespace

BLWeightParams BLWeightParams::at(double nu, double t, double beta, double P) {
  if (nu < 0.0 || t < 0.0) throw DomainError("BLWeightParams: nu and t must be non-negative");
  BLWeightParams p;
  p.beta = beta;
  p.P = P;
  p.delta = std::sqrt(nu);
  p.delta_t = std::sqrt(nu * t);
  p.validate();
  return p;
}

void BLWeightParams::validate() const {
  if (!(beta > 0.0)) throw DomainError("boundary-layer weight: beta must be positive");
  if (!(P > 1.0)) throw DomainError("boundary-layer weight: P must exceed 1");
  if (!(delta >= 0.0) || !(delta_t >= 0.0)) throw DomainError("boundary-layer weight: thicknesses must be >= 0");
}

double phi_P(double s, double P) { return 1.0 / (1.0 + std::pow(std::abs(s), P)); }

double bl_weight(double z, double t, const BLWeightParams& p) {
  double w = 1.0;
  if (t > 0.0 && p.delta_t > 0.0) w += phi_P(z / p.delta_t, p.P) / p.delta_t;
  if (p.delta > 0.0) w += phi_P(z / p.delta, p.P) / p.delta;
  return w;
}

ModeSum bl_norm_detail(const SpectralField& w, double t, double rho, const BLWeightParams& p, int k) {
  p.validate();
  if (k < 0) throw DomainError("bl_norm: negative derivative order");
  const int K = w.truncation();
  check_rho(rho, K);
  const auto& g = w.grid();
  std::vector<double> scale(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) scale[j] = std::exp(p.beta * g.nodes[j]) / bl_weight(g.nodes[j], t, p);
  std::vector<double> per_mode(static_cast<std::size_t>(2 * K + 1), 0.0);
  for (int a = -K; a <= K; ++a) {
    const auto d = conormal_powers(w.mode(a), g, k);
    double m = 0.0;
    for (int l = 0; l <= k; ++l) {
      double sup = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) sup = std::max(sup, std::abs(d[l][j]) * scale[j]);
      for (int jx = 0; jx + l <= k; ++jx) m += std::pow(std::abs(a), jx) * sup;
    }
    per_mode[static_cast<std::size_t>(a + K)] = weight_exp(rho, a) * m;
  }
  ModeSum r;
  for (double v : per_mode) r.value += v;
  for (int a = K; a >= 0; --a) {
    const double pair = per_mode[static_cast<std::size_t>(a + K)] + (a > 0 ? per_mode[static_cast<std::size_t>(K - a)] : 0.0);
    if (pair > 0.0) {
      r.last_mode_fraction = r.value > 0.0 ? pair / r.value : 0.0;
      break;
    }
  }
  return r;
}

double bl_norm(const SpectralField& w, double t, double rho, const BLWeightParams& p, int k) {
  return bl_norm_detail(w, t, rho, p, k).value;
}

void AnalyticNormSpec::validate() const {
  if (!std::isfinite(rho) || rho < 0.0) throw DomainError("AnalyticNormSpec: rho must be >= 0");
  if (!std::isfinite(sigma) || sigma < 0.0) throw DomainError("AnalyticNormSpec: sigma must be >= 0");
  if (k < 0) throw DomainError("AnalyticNormSpec: k must be >= 0");
  if (theta_samples.empty()) throw DomainError("AnalyticNormSpec: need at least one theta sample");
  for (double th : theta_samples) {
    if (!(th >= 0.0) || (th >= sigma && th != 0.0)) throw DomainError("AnalyticNormSpec: theta samples must lie in [0, sigma)");
  }
}

std::vector<double> AnalyticNormSpec::default_thetas(double sigma) {
  if (sigma <= 0.0) return {0.0};
  return {0.0, 0.25 * sigma, 0.5 * sigma, 0.75 * sigma};
}

AnalyticNorms analytic_norms(const SpectralField& w, const AnalyticNormSpec& spec) {
  spec.validate();
  const int K = w.truncation();
  check_rho(spec.rho, K);
  const auto& g = w.grid();
  AnalyticNorms n;
  for (int a = -K; a <= K; ++a) {
    const double e = weight_exp(spec.rho, a);
    const auto& f = w.mode(a);
    n.l1 += e * integrate_abs(g, f);
    double sup = 0.0;
    for (const auto& v : f) sup = std::max(sup, std::abs(v));
    n.linf += e * sup;
    const auto d = conormal_powers(f, g, spec.k);
    for (int l = 0; l <= spec.k; ++l) {
      const double m = integrate_abs(g, d[l]);
      for (int jx = 0; jx + l <= spec.k; ++jx) n.wk1 += e * std::pow(std::abs(a), jx) * m;
    }
  }
  return n;
}

// ---------------------------------------------------------------------------
// Pencil contours

PencilPath make_pencil_path(double theta, int sign, int points_per_panel, double s_max) {
  if (theta < 0.0 || (sign != 1 && sign != -1)) throw DomainError("make_pencil_path: theta >= 0 and sign = +-1");
  if (!(s_max > 2.0)) throw DomainError("make_pencil_path: s_max must exceed 2");
  const auto rule = gl::legendre(points_per_panel);
  PencilPath p;
  p.theta = theta;
  p.sign = sign;
  p.points_per_panel = points_per_panel;
  p.edges.push_back(0.0);
  for (double e = 1e-3; e < 1.0; e *= 2.0) p.edges.push_back(e);
  p.edges.push_back(1.0);
  for (double e = 1.5; e < s_max; e *= 1.5) p.edges.push_back(e);
  p.edges.push_back(s_max);
  for (std::size_t q = 0; q + 1 < p.edges.size(); ++q) {
    const double a = p.edges[q], b = p.edges[q + 1];
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      const double s = mid + half * rule.x[i];
      const double imag = s < 1.0 ? sign * theta * s : sign * theta;
      const cd slope = s < 1.0 ? cd(1.0, sign * theta) : cd(1.0, 0.0);
      p.s.push_back(s);
      p.z.emplace_back(s, imag);
      p.dz_ds.push_back(slope);
      p.w.push_back(half * rule.w[i] * std::abs(slope));
    }
  }
  return p;
}

namespace {

cd path_point(const PencilPath& p, double s) { return {s, s < 1.0 ? p.sign * p.theta * s : p.sign * p.theta}; }
cd path_slope(const PencilPath& p, double s) { return s < 1.0 ? cd(1.0, p.sign * p.theta) : cd(1.0, 0.0); }

struct PathSet {
  std::vector<PencilPath> paths;
};

PathSet make_paths(const std::vector<double>& thetas, int ppp) {
  PathSet ps;
  for (double th : thetas) {
    ps.paths.push_back(make_pencil_path(th, 1, ppp));
    if (th > 0.0) ps.paths.push_back(make_pencil_path(th, -1, ppp));
  }
  return ps;
}

std::vector<cd> eval_on(const ClosedFormProfile& f, const PencilPath& p) {
  std::vector<cd> v(p.z.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f.empty() ? cd{} : f(p.z[i]);
  return v;
}

double path_l1(const std::vector<cd>& v, const PencilPath& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += p.w[i] * std::abs(v[i]);
  return s;
}

double path_sup(const std::vector<cd>& v) {
  double s = 0.0;
  for (const auto& x : v) s = std::max(s, std::abs(x));
  return s;
}

cd psi_c(cd z) { return z / (1.0 + z); }
cd dpsi_c(cd z) { return 1.0 / ((1.0 + z) * (1.0 + z)); }

/// Values of f, psi f', and (psi d)^2 f on a path.
struct ModeOnPath {
  std::vector<cd> f, d1, d2, df;
};

ModeOnPath mode_on_path(const ClosedFormProfile& f, const PencilPath& p) {
  ModeOnPath m;
  m.f = eval_on(f, p);
  const auto n = p.z.size();
  m.d1.assign(n, {});
  m.d2.assign(n, {});
  m.df.assign(n, {});
  if (f.empty()) return m;
  const auto f1 = f.derivative();
  const auto f2 = f1.derivative();
  for (std::size_t i = 0; i < n; ++i) {
    const cd z = p.z[i];
    const cd a = f1(z), b = f2(z);
    m.df[i] = a;
    m.d1[i] = psi_c(z) * a;
    m.d2[i] = psi_c(z) * (dpsi_c(z) * a + psi_c(z) * b);
  }
  return m;
}

/// Stream function of a closed-form mode and its z-derivative at the nodes
/// of a path, integrating the half-space Green function along the path:
/// below-node contributions use G_-, above-node contributions G_+.
struct StreamOnPath {
  std::vector<cd> phi, dphi;
};

StreamOnPath stream_on_path(const ClosedFormProfile& f, int alpha, const PencilPath& p) {
  const std::size_t n = p.z.size();
  StreamOnPath out{std::vector<cd>(n), std::vector<cd>(n)};
  if (f.empty()) return out;
  const double A = std::abs(alpha);
  const auto rule = gl::legendre(p.points_per_panel);
  const std::size_t m = rule.x.size();
  const std::size_t panels = p.edges.size() - 1;
  std::vector<cd> h(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ds = p.w[i] / std::abs(p.dz_ds[i]);
    h[i] = f(p.z[i]) * p.dz_ds[i] * ds;
  }
  // Sub-panel rule from s = a to s = b along the path.
  auto sub = [&](double a, double b, auto&& fn) {
    if (b <= a) return;
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t q = 0; q < m; ++q) {
      const double s = mid + half * rule.x[q];
      const cd y = path_point(p, s);
      fn(y, f(y) * path_slope(p, s) * (half * rule.w[q]));
    }
  };
  if (A == 0.0) {
    // G_-(y,z) = -y, G_+(y,z) = -z; d/dz: 0 and -1.
    std::vector<cd> below_y(panels + 1), above_1(panels + 1);
    for (std::size_t q = 0; q < panels; ++q) {
      cd s = 0.0;
      for (std::size_t i = q * m; i < (q + 1) * m; ++i) s += p.z[i] * h[i];
      below_y[q + 1] = below_y[q] + s;
    }
    for (std::size_t q = panels; q-- > 0;) {
      cd s = 0.0;
      for (std::size_t i = q * m; i < (q + 1) * m; ++i) s += h[i];
      above_1[q] = above_1[q + 1] + s;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t q = i / m;
      const cd z = p.z[i];
      cd lo_y = below_y[q], up_1 = above_1[q + 1];
      sub(p.edges[q], p.s[i], [&](cd y, cd hy) { lo_y += y * hy; });
      sub(p.s[i], p.edges[q + 1], [&](cd, cd hy) { up_1 += hy; });
      out.phi[i] = -lo_y - z * up_1;
      out.dphi[i] = -up_1;
    }
    return out;
  }
  // Running sums anchored at panel edges c_q:
  //   L_q = sum_{y < c_q} e^{-A (c_q - y)} h,  U_q = sum_{y > c_q} e^{-A (y - c_q)} h,
  //   J = sum e^{-A y} h (whole path).
  std::vector<cd> c(panels + 1);
  for (std::size_t q = 0; q <= panels; ++q) c[q] = path_point(p, p.edges[q]);
  std::vector<cd> L(panels + 1), U(panels + 1);
  for (std::size_t q = 0; q < panels; ++q) {
    cd s = std::exp(-A * (c[q + 1] - c[q])) * L[q];
    for (std::size_t i = q * m; i < (q + 1) * m; ++i) s += std::exp(-A * (c[q + 1] - p.z[i])) * h[i];
    L[q + 1] = s;
  }
  for (std::size_t q = panels; q-- > 0;) {
    cd s = std::exp(-A * (c[q + 1] - c[q])) * U[q + 1];
    for (std::size_t i = q * m; i < (q + 1) * m; ++i) s += std::exp(-A * (p.z[i] - c[q])) * h[i];
    U[q] = s;
  }
  cd J = 0.0;
  for (std::size_t i = 0; i < n; ++i) J += std::exp(-A * p.z[i]) * h[i];
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t q = i / m;
    const cd z = p.z[i];
    cd lo = std::exp(-A * (z - c[q])) * L[q];
    cd up = std::exp(-A * (c[q + 1] - z)) * U[q + 1];
    sub(p.edges[q], p.s[i], [&](cd y, cd hy) { lo += std::exp(-A * (z - y)) * hy; });
    sub(p.s[i], p.edges[q + 1], [&](cd y, cd hy) { up += std::exp(-A * (y - z)) * hy; });
    const cd img = std::exp(-A * z) * J;
    out.phi[i] = -(lo + up - img) / (2.0 * A);
    out.dphi[i] = 0.5 * (lo - up - img);
  }
  return out;
}

/// L^1_sigma and L^inf_sigma of an arbitrary per-path quantity.
struct StripNorm {
  double l1 = 0.0;
  double sup = 0.0;
};

template <typename Fn>
StripNorm strip_norm(const PathSet& ps, Fn&& values_on) {
  StripNorm r;
  for (const auto& p : ps.paths) {
    const auto v = values_on(p);
    r.l1 = std::max(r.l1, path_l1(v, p));
    r.sup = std::max(r.sup, path_sup(v));
  }
  return r;
}

int field_k(const ClosedFormField& f) { return f.truncation(); }

void check_finite(const std::vector<cd>& v, const std::string& what) {
  for (const auto& x : v) {
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) throw NumericalError(what + ": non-finite value on the strip");
  }
}

struct FieldOnPaths {
  // [path][alpha + K]
  std::vector<std::vector<ModeOnPath>> modes;
  int K = 0;
};

FieldOnPaths field_on_paths(const ClosedFormField& f, const PathSet& ps) {
  FieldOnPaths r;
  r.K = field_k(f);
  for (const auto& p : ps.paths) {
    std::vector<ModeOnPath> row;
    for (int a = -r.K; a <= r.K; ++a) {
      row.push_back(mode_on_path(f.mode(a), p));
      check_finite(row.back().f, f.name);
    }
    r.modes.push_back(std::move(row));
  }
  return r;
}

/// sum_alpha e^{rho|alpha|} sup_paths (int |v_alpha| or sup |v_alpha|).
template <typename Get>
double strip_sum(const PathSet& ps, int K, double rho, bool sup, Get&& get) {
  double total = 0.0;
  for (int a = -K; a <= K; ++a) {
    double best = 0.0;
    for (std::size_t ip = 0; ip < ps.paths.size(); ++ip) {
      const std::vector<cd>& v = get(ip, a);
      best = std::max(best, sup ? path_sup(v) : path_l1(v, ps.paths[ip]));
    }
    total += weight_exp(rho, a) * best;
  }
  return total;
}

}  // namespace

AnalyticNorms analytic_norms(const ClosedFormField& f, const AnalyticNormSpec& spec, int points_per_panel) {
  spec.validate();
  if (spec.k > 2) throw DomainError("closed-form W^{k,1} norms are available for k <= 2");
  const int K = field_k(f);
  check_rho(spec.rho, K);
  const auto ps = make_paths(spec.theta_samples, points_per_panel);
  const auto fp = field_on_paths(f, ps);
  auto at = [&](int l) {
    return [&fp, l](std::size_t ip, int a) -> const std::vector<cd>& {
      const auto& m = fp.modes[ip][static_cast<std::size_t>(a + fp.K)];
      return l == 0 ? m.f : (l == 1 ? m.d1 : m.d2);
    };
  };
  AnalyticNorms n;
  n.l1 = strip_sum(ps, K, spec.rho, false, at(0));
  n.linf = strip_sum(ps, K, spec.rho, true, at(0));
  for (int l = 0; l <= spec.k; ++l) {
    for (int jx = 0; jx + l <= spec.k; ++jx) {
      for (int a = -K; a <= K; ++a) {
        double best = 0.0;
        for (std::size_t ip = 0; ip < ps.paths.size(); ++ip) best = std::max(best, path_l1(at(l)(ip, a), ps.paths[ip]));
        n.wk1 += weight_exp(spec.rho, a) * std::pow(std::abs(a), jx) * best;
      }
    }
  }
  return n;
}

namespace {

std::vector<double> bl_scale(const PencilPath& p, double t, const BLWeightParams& w) {
  std::vector<double> s(p.z.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::exp(w.beta * p.z[i].real()) / bl_weight(p.z[i].real(), t, w);
  return s;
}

double scaled_sup(const std::vector<cd>& v, const std::vector<double>& s) {
  double r = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) r = std::max(r, std::abs(v[i]) * s[i]);
  return r;
}

double bl_norm_on(const PathSet& ps, int K, double rho, double t, const BLWeightParams& w,
                  const std::function<const std::vector<cd>&(std::size_t, int)>& get) {
  double total = 0.0;
  std::vector<std::vector<double>> scales;
  for (const auto& p : ps.paths) scales.push_back(bl_scale(p, t, w));
  for (int a = -K; a <= K; ++a) {
    double best = 0.0;
    for (std::size_t ip = 0; ip < ps.paths.size(); ++ip) best = std::max(best, scaled_sup(get(ip, a), scales[ip]));
    total += weight_exp(rho, a) * best;
  }
  return total;
}

}  // namespace

double bl_norm(const ClosedFormField& f, double t, const AnalyticNormSpec& spec, const BLWeightParams& p,
               int points_per_panel) {
  spec.validate();
  p.validate();
  const int K = field_k(f);
  check_rho(spec.rho, K);
  const auto ps = make_paths(spec.theta_samples, points_per_panel);
  const auto fp = field_on_paths(f, ps);
  return bl_norm_on(ps, K, spec.rho, t, p, [&](std::size_t ip, int a) -> const std::vector<cd>& {
    return fp.modes[ip][static_cast<std::size_t>(a + K)].f;
  });
}

double embedding_constant(double t, const AnalyticNormSpec& spec, const BLWeightParams& p, int points_per_panel) {
  spec.validate();
  p.validate();
  const auto ps = make_paths(spec.theta_samples, points_per_panel);
  double c = 0.0;
  for (const auto& path : ps.paths) {
    double s = 0.0;
    for (std::size_t i = 0; i < path.z.size(); ++i) {
      const double x = path.z[i].real();
      s += path.w[i] * std::exp(-p.beta * x) * bl_weight(x, t, p);
    }
    c = std::max(c, s);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Iterative norms and profile fit

void IterativeNormSpec::validate() const {
  if (!(gamma > 0.0)) throw DomainError("IterativeNormSpec: gamma must be positive");
  if (!(zeta > 0.0 && zeta < 1.0)) throw DomainError("IterativeNormSpec: zeta must lie in (0, 1)");
  if (!(rho0 > 0.0)) throw DomainError("IterativeNormSpec: rho0 must be positive");
  if (ladder < 1) throw DomainError("IterativeNormSpec: ladder needs at least one point");
}

std::vector<double> IterativeNormSpec::rho_ladder(double t) const {
  const double r = rho0 - gamma * t;
  std::vector<double> out;
  if (r <= 0.0) return out;
  for (int j = 1; j <= ladder; ++j) out.push_back(r * (1.0 - std::ldexp(1.0, -j)));
  return out;
}

namespace {

/// Per-mode ingredients of the W^{k,1} and boundary-layer norms for k <= 2:
/// entry [a + K][l] holds int |(psi dz)^l w_a| (or the weighted sup).
struct ModeTable {
  int K = 0;
  std::vector<std::array<double, 3>> v;
};

ModeTable mode_table(const SpectralField& w, bool bl, double t, const BLWeightParams& p) {
  ModeTable tab;
  tab.K = w.truncation();
  const auto& g = w.grid();
  std::vector<double> scale;
  if (bl) {
    scale.resize(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) scale[j] = std::exp(p.beta * g.nodes[j]) / bl_weight(g.nodes[j], t, p);
  }
  for (int a = -tab.K; a <= tab.K; ++a) {
    const auto d = conormal_powers(w.mode(a), g, 2);
    std::array<double, 3> row{};
    for (int l = 0; l <= 2; ++l) {
      if (bl) {
        double sup = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) sup = std::max(sup, std::abs(d[l][j]) * scale[j]);
        row[l] = sup;
      } else {
        row[l] = integrate_abs(g, d[l]);
      }
    }
    tab.v.push_back(row);
  }
  return tab;
}

double table_norm(const ModeTable& tab, double rho, int k) {
  double s = 0.0;
  for (int a = -tab.K; a <= tab.K; ++a) {
    const auto& row = tab.v[static_cast<std::size_t>(a + tab.K)];
    double m = 0.0;
    for (int l = 0; l <= k; ++l)
      for (int jx = 0; jx + l <= k; ++jx) m += std::pow(std::abs(a), jx) * row[l];
    s += weight_exp(rho, a) * m;
  }
  return s;
}

}  // namespace

IterativeNorms iterative_norms(const Trajectory& traj, const IterativeNormSpec& spec, double nu, double beta,
                               double P) {
  spec.validate();
  IterativeNorms r;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    const double gt = spec.gamma * t;
    if (!(gt > 0.0 && gt < spec.rho0)) continue;
    const auto& w = traj.vorticity.at(i);
    check_rho(spec.rho0, w.truncation());
    const auto p = BLWeightParams::at(nu, t, beta, P);
    const auto ta = mode_table(w, false, t, p);
    const auto tb = mode_table(w, true, t, p);
    double a_best = 0.0, b_best = 0.0;
    for (double rho : spec.rho_ladder(t)) {
      const double weight = std::pow(spec.rho0 - rho - gt, spec.zeta);
      a_best = std::max(a_best, table_norm(ta, rho, 1) + table_norm(ta, rho, 2) * weight);
      b_best = std::max(b_best, table_norm(tb, rho, 1) + table_norm(tb, rho, 2) * weight);
    }
    r.times.push_back(t);
    r.a_curve.push_back(a_best);
    r.b_curve.push_back(b_best);
    r.A = std::max(r.A, a_best);
    r.B = std::max(r.B, b_best);
  }
  return r;
}

std::vector<double> bl_profile_fit(const Trajectory& traj, double nu, double beta, double P, std::size_t nx) {
  std::vector<double> c(traj.times.size(), 0.0);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    const auto& w = traj.vorticity.at(i);
    const auto p = BLWeightParams::at(nu, t, beta, P);
    const std::size_t n = nx ? nx : default_nx(w.truncation());
    const auto phys = inverse_transform(w, n);
    const auto& g = w.grid();
    double best = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double s = std::exp(beta * g.nodes[j]) / bl_weight(g.nodes[j], t, p);
      for (std::size_t ix = 0; ix < n; ++ix) best = std::max(best, std::abs(phys.at(ix, j)) * s);
    }
    c[i] = best;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Norm inequality suite

double LemmaCheck::refinement_change() const {
  if (max_ratio == 0.0) return refined_max_ratio == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(refined_max_ratio - max_ratio) / std::abs(max_ratio);
}

const LemmaCheck& NormLemmaReport::get(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw DomainError("no lemma check named '" + name + "'");
}

namespace {

using ModeValues = std::vector<std::vector<cd>>;  // [alpha + K][node]

struct PathField {
  int K = 0;
  ModeValues f, fx, d1, df, u1, u2, phi;
};

/// All quantities of one closed-form field needed by the suite on one path.
PathField path_field(const ClosedFormField& field, const PencilPath& p) {
  PathField r;
  r.K = field.truncation();
  for (int a = -r.K; a <= r.K; ++a) {
    const auto prof = field.mode(a);
    const auto m = mode_on_path(prof, p);
    check_finite(m.f, field.name);
    const auto s = stream_on_path(prof, a, p);
    std::vector<cd> fx(m.f.size()), u2(m.f.size());
    for (std::size_t i = 0; i < fx.size(); ++i) {
      fx[i] = cd(0.0, a) * m.f[i];
      u2[i] = cd(0.0, -a) * s.phi[i];
    }
    r.f.push_back(m.f);
    r.fx.push_back(fx);
    r.d1.push_back(m.d1);
    r.df.push_back(m.df);
    r.u1.push_back(s.dphi);
    r.u2.push_back(u2);
    r.phi.push_back(s.phi);
  }
  return r;
}

const std::vector<cd>& at(const ModeValues& v, int K, int a) { return v[static_cast<std::size_t>(a + K)]; }

/// Pointwise product of two x-Fourier series: (fg)_a = sum_b f_{a-b} g_b.
ModeValues convolve(const ModeValues& f, int Kf, const ModeValues& g, int Kg) {
  const int K = Kf + Kg;
  const std::size_t n = f.empty() ? 0 : f[0].size();
  ModeValues out(static_cast<std::size_t>(2 * K + 1), std::vector<cd>(n));
  for (int a = -Kf; a <= Kf; ++a)
    for (int b = -Kg; b <= Kg; ++b) {
      const auto& x = at(f, Kf, a);
      const auto& y = at(g, Kg, b);
      auto& o = out[static_cast<std::size_t>(a + b + K)];
      for (std::size_t i = 0; i < n; ++i) o[i] += x[i] * y[i];
    }
  return out;
}

/// Norms over a set of paths of a mode table given per path: the strip sup is
/// taken mode by mode, as in the definition.
struct Tables {
  std::vector<ModeValues> per_path;
  int K = 0;
};

double tables_l1(const Tables& t, const PathSet& ps, double rho) {
  double s = 0.0;
  for (int a = -t.K; a <= t.K; ++a) {
    double best = 0.0;
    for (std::size_t ip = 0; ip < ps.paths.size(); ++ip) best = std::max(best, path_l1(at(t.per_path[ip], t.K, a), ps.paths[ip]));
    s += weight_exp(rho, a) * best;
  }
  return s;
}

double tables_sup(const Tables& t, const PathSet& ps, double rho) {
  double s = 0.0;
  for (int a = -t.K; a <= t.K; ++a) {
    double best = 0.0;
    for (std::size_t ip = 0; ip < ps.paths.size(); ++ip) best = std::max(best, path_sup(at(t.per_path[ip], t.K, a)));
    s += weight_exp(rho, a) * best;
  }
  return s;
}

double tables_bl(const Tables& t, const PathSet& ps, double rho, double time, const BLWeightParams& w) {
  double s = 0.0;
  for (int a = -t.K; a <= t.K; ++a) {
    double best = 0.0;
    for (std::size_t ip = 0; ip < ps.paths.size(); ++ip)
      best = std::max(best, scaled_sup(at(t.per_path[ip], t.K, a), bl_scale(ps.paths[ip], time, w)));
    s += weight_exp(rho, a) * best;
  }
  return s;
}

Tables collect(const std::vector<PathField>& pf, ModeValues PathField::*member) {
  Tables t;
  t.K = pf.empty() ? 0 : pf[0].K;
  for (const auto& x : pf) t.per_path.push_back(x.*member);
  return t;
}

template <typename Fn>
Tables derive(const std::vector<PathField>& pf, int K, Fn&& fn) {
  Tables t;
  t.K = K;
  for (const auto& x : pf) t.per_path.push_back(fn(x));
  return t;
}

ModeValues add(const ModeValues& a, const ModeValues& b) {
  ModeValues r = a;
  for (std::size_t m = 0; m < r.size(); ++m)
    for (std::size_t i = 0; i < r[m].size(); ++i) r[m][i] += b[m][i];
  return r;
}

struct SuiteRun {
  std::map<std::string, std::pair<double, std::string>> worst;  // name -> (max ratio, field)
  void note(const std::string& name, double ratio, const std::string& field) {
    auto& w = worst[name];
    if (!std::isfinite(ratio)) {
      w = {std::numeric_limits<double>::infinity(), field};
      return;
    }
    if (w.second.empty() || ratio > w.first) w = {ratio, field};
  }
};

SuiteRun run_suite(const std::vector<ClosedFormField>& corpus, const LemmaSuiteParams& prm, int ppp) {
  SuiteRun run;
  const double rho = prm.rho, sigma = prm.sigma;
  const auto thetas = AnalyticNormSpec::default_thetas(sigma);
  const auto ps = make_paths(thetas, ppp);
  const auto bw = BLWeightParams::at(prm.nu, prm.t);
  AnalyticNormSpec spec{rho, sigma, thetas, 1};
  const double c_emb = embedding_constant(prm.t, spec, bw, ppp);

  std::vector<std::vector<PathField>> fields;
  for (const auto& f : corpus) {
    check_rho(rho, f.truncation());
    std::vector<PathField> per;
    for (const auto& p : ps.paths) per.push_back(path_field(f, p));
    fields.push_back(std::move(per));
  }

  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& name = corpus[i].name;
    const auto& pf = fields[i];
    const int K = corpus[i].truncation();
    const auto F = collect(pf, &PathField::f);
    const double l1 = tables_l1(F, ps, rho);
    const double linf = tables_sup(F, ps, rho);
    const double bl = tables_bl(F, ps, rho, prm.t, bw);

    // Pointwise weight bound: |f_a(z)| <= ||f_a||_bl e^{-beta Re z} weight(Re z) on every node.
    double pointwise = 0.0;
    for (int a = -K; a <= K; ++a) {
      double norm_a = 0.0;
      for (std::size_t ip = 0; ip < ps.paths.size(); ++ip)
        norm_a = std::max(norm_a, scaled_sup(at(F.per_path[ip], K, a), bl_scale(ps.paths[ip], prm.t, bw)));
      if (norm_a == 0.0) continue;
      for (std::size_t ip = 0; ip < ps.paths.size(); ++ip) {
        const auto& v = at(F.per_path[ip], K, a);
        const auto s = bl_scale(ps.paths[ip], prm.t, bw);
        for (std::size_t q = 0; q < v.size(); ++q) pointwise = std::max(pointwise, std::abs(v[q]) * s[q] / norm_a);
      }
    }
    run.note("embedding_pointwise", pointwise, name);
    run.note("embedding_l1", l1 / (c_emb * bl), name);

    // Derivative loss in x with the exact factor sup_s s e^{-s}.
    const auto FX = collect(pf, &PathField::fx);
    double ax = 0.0;
    for (double frac : {0.25, 0.5, 0.75}) {
      const double rp = frac * rho;
      ax = std::max(ax, (rho - rp) * tables_l1(FX, ps, rp) / l1);
    }
    run.note("derivative_loss_x", ax, name);

    // Derivative loss of the conormal derivative on narrower strips.
    double az = 0.0;
    for (double frac : {0.25, 0.5, 0.75}) {
      const double sp = frac * sigma;
      const auto ps_p = make_paths(AnalyticNormSpec::default_thetas(sp), ppp);
      Tables D;
      D.K = K;
      for (const auto& p : ps_p.paths) {
        ModeValues mv;
        for (int a = -K; a <= K; ++a) mv.push_back(mode_on_path(corpus[i].mode(a), p).d1);
        D.per_path.push_back(std::move(mv));
      }
      az = std::max(az, (sigma - sp) * tables_l1(D, ps_p, rho) / l1);
    }
    run.note("derivative_loss_z", az, name);

    // Elliptic estimates.
    const auto U1 = collect(pf, &PathField::u1);
    const auto U2 = collect(pf, &PathField::u2);
    run.note("elliptic_sup", (tables_sup(U1, ps, rho) + tables_sup(U2, ps, rho)) / l1, name);

    const double l1x = tables_l1(FX, ps, rho);
    const auto U1x = derive(pf, K, [&](const PathField& x) {
      ModeValues r = x.u1;
      for (int a = -K; a <= K; ++a)
        for (auto& v : r[static_cast<std::size_t>(a + K)]) v *= cd(0.0, a);
      return r;
    });
    const auto U2x = derive(pf, K, [&](const PathField& x) {
      ModeValues r = x.u2;
      for (int a = -K; a <= K; ++a)
        for (auto& v : r[static_cast<std::size_t>(a + K)]) v *= cd(0.0, a);
      return r;
    });
    // dz u2 = -i a dphi
    const auto U2z = derive(pf, K, [&](const PathField& x) {
      ModeValues r = x.u1;
      for (int a = -K; a <= K; ++a)
        for (auto& v : r[static_cast<std::size_t>(a + K)]) v *= cd(0.0, -a);
      return r;
    });
    const auto U2psi = derive(pf, K, [&](const PathField& x) {
      ModeValues r = x.u2;
      const auto& z = ps.paths[static_cast<std::size_t>(&x - pf.data())].z;
      for (auto& m : r)
        for (std::size_t q = 0; q < m.size(); ++q) m[q] /= psi_c(z[q]);
      return r;
    });
    const double grad_sup = tables_sup(U1x, ps, rho) + tables_sup(U2x, ps, rho) + tables_sup(U2z, ps, rho) +
                        tables_sup(U2psi, ps, rho);
    run.note("elliptic_grad_sup", grad_sup / (l1 + l1x), name);

    // dz u1 = phi'' = a^2 phi + w
    const auto U1z = derive(pf, K, [&](const PathField& x) {
      ModeValues r = x.phi;
      for (int a = -K; a <= K; ++a) {
        auto& m = r[static_cast<std::size_t>(a + K)];
        const auto& w = x.f[static_cast<std::size_t>(a + K)];
        for (std::size_t q = 0; q < m.size(); ++q) m[q] = static_cast<double>(a * a) * m[q] + w[q];
      }
      return r;
    });
    const double grad_l1 = tables_l1(U1x, ps, rho) + tables_l1(U1z, ps, rho) + tables_l1(U2x, ps, rho) +
                        tables_l1(U2z, ps, rho);
    run.note("elliptic_grad_l1", grad_l1 / l1, name);

    // Pairs with the next corpus field (and with itself) for the product and bilinear checks.
    for (std::size_t jdx : {i, (i + 1) % corpus.size()}) {
      const auto& pg = fields[jdx];
      const int Kg = corpus[jdx].truncation();
      const auto G = collect(pg, &PathField::f);
      const double g_l1 = tables_l1(G, ps, rho);
      const double g_bl = tables_bl(G, ps, rho, prm.t, bw);
      Tables FG;
      FG.K = K + Kg;
      for (std::size_t ip = 0; ip < ps.paths.size(); ++ip) FG.per_path.push_back(convolve(pf[ip].f, K, pg[ip].f, Kg));
      const std::string pair = name + "*" + corpus[jdx].name;
      run.note("product", tables_l1(FG, ps, rho) / (linf * g_l1), pair);
      run.note("product_bl", tables_bl(FG, ps, rho, prm.t, bw) / (linf * g_bl), pair);

      // v . grad g with v the velocity of f.
      Tables VG;
      VG.K = K + Kg;
      for (std::size_t ip = 0; ip < ps.paths.size(); ++ip) {
        const auto gx = pg[ip].fx;
        VG.per_path.push_back(add(convolve(pf[ip].u1, K, gx, Kg), convolve(pf[ip].u2, K, pg[ip].df, Kg)));
      }
      const auto GX = collect(pg, &PathField::fx);
      const auto GZ = collect(pg, &PathField::d1);
      const double rhs = l1 * tables_l1(GX, ps, rho) + (l1 + l1x) * tables_l1(GZ, ps, rho);
      run.note("bilinear", tables_l1(VG, ps, rho) / rhs, pair);
    }
  }
  return run;
}

int refined_points(int ppp) {
  switch (ppp) {
    case 4: return 8;
    case 6: return 12;
    case 8: return 16;
    case 10: return 20;
    default: return 20;
  }
}

}  // namespace

NormLemmaReport verify_norm_lemmas(const std::vector<ClosedFormField>& corpus, const LemmaSuiteParams& params) {
  if (corpus.empty()) throw DomainError("verify_norm_lemmas: empty corpus");
  if (!(params.rho > 0.0) || !(params.sigma > 0.0)) throw DomainError("verify_norm_lemmas: rho, sigma must be > 0");
  const int fine = refined_points(params.points_per_panel);
  if (fine == params.points_per_panel) throw DomainError("verify_norm_lemmas: choose points_per_panel <= 10");
  const auto coarse = run_suite(corpus, params, params.points_per_panel);
  const auto refined = run_suite(corpus, params, fine);

  const std::map<std::string, double> bounds{{"embedding_pointwise", 1.0},
                                             {"embedding_l1", 1.0},
                                             {"product", 1.0},
                                             {"product_bl", 1.0},
                                             {"derivative_loss_x", std::exp(-1.0)}};
  NormLemmaReport rep;
  rep.corpus_size = corpus.size();
  rep.rho = params.rho;
  rep.sigma = params.sigma;
  const double slack = 1e-12;
  for (const auto& name : {"embedding_pointwise", "embedding_l1", "product", "product_bl", "derivative_loss_x", "derivative_loss_z", "elliptic_sup",
                           "elliptic_grad_sup", "elliptic_grad_l1", "bilinear"}) {
    LemmaCheck c;
    c.name = name;
    c.max_ratio = coarse.worst.at(name).first;
    c.worst_field = coarse.worst.at(name).second;
    c.refined_max_ratio = refined.worst.at(name).first;
    const auto it = bounds.find(name);
    c.bound = it == bounds.end() ? 0.0 : it->second;
    c.finite = std::isfinite(c.max_ratio) && std::isfinite(c.refined_max_ratio);
    c.within_bound = c.finite && (c.bound == 0.0 || std::max(c.max_ratio, c.refined_max_ratio) <= c.bound * (1.0 + slack));
    rep.checks.push_back(c);
  }
  return rep;
}

double elliptic_ratio_refinement_change(const std::vector<ClosedFormField>& corpus, std::size_t n_nodes) {
  double change = 0.0;
  std::vector<double> ratio[2];
  for (int level = 0; level < 2; ++level) {
    auto grid = std::make_shared<const GradedGrid>(build_graded_grid(60.0, n_nodes << level, 0.02));
    for (const auto& f : corpus) {
      const int K = std::max(f.truncation(), 1);
      const auto w = f.sample(grid, K);
      const auto u = velocity_from_vorticity(w);
      AnalyticNormSpec spec;
      spec.k = 0;
      const double l1 = analytic_norms(w, spec).l1;
      const double lhs = analytic_norms(u.u1, spec).linf + analytic_norms(u.u2, spec).linf;
      ratio[level].push_back(lhs / l1);
    }
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) change = std::max(change, std::abs(ratio[1][i] - ratio[0][i]) / ratio[0][i]);
  return change;
}

nlohmann::json to_json(const NormLemmaReport& r) {
  nlohmann::json j;
  j["corpus_size"] = r.corpus_size;
  j["rho"] = r.rho;
  j["sigma"] = r.sigma;
  for (const auto& c : r.checks) {
    j["checks"].push_back({{"name", c.name},
                           {"max_ratio", c.max_ratio},
                           {"refined_max_ratio", c.refined_max_ratio},
                           {"refinement_change", c.refinement_change()},
                           {"bound", c.bound},
                           {"worst_field", c.worst_field},
                           {"finite", c.finite},
                           {"within_bound", c.within_bound}});
  }
  return j;
}

nlohmann::json to_json(const IterativeNorms& r) {
  return {{"A", r.A}, {"B", r.B}, {"times", r.times}, {"A_curve", r.a_curve}, {"B_curve", r.b_curve}};
}

}  // namespace hsns
