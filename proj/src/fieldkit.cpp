#include "hsns/fieldkit.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include "hsns/error.hpp"

namespace hsns {

namespace {

// Nodes z_{i+1} = z_i + h0 r^i, ratio chosen so that z_{n-1} = z_max.
std::vector<double> geometric_nodes(double z_max, std::size_t n, double h0) {
  const auto cells = static_cast<double>(n - 1);
  std::vector<double> z(n, 0.0);
  double ratio = 1.0;
  if (z_max / cells > h0) {
    auto span_for = [&](double r) {
      // h0 * (r^cells - 1) / (r - 1), written to stay accurate near r = 1
      return h0 * std::expm1(cells * std::log(r)) / (r - 1.0);
    };
    double lo = 1.0 + 1e-15;
    double hi = 2.0;
    while (span_for(hi) < z_max) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (span_for(mid) < z_max ? lo : hi) = mid;
    }
    ratio = 0.5 * (lo + hi);
  }
  double h = (ratio == 1.0) ? z_max / cells : h0;
  for (std::size_t i = 1; i < n; ++i) {
    z[i] = z[i - 1] + h;
    h *= ratio;
  }
  const double scale = z_max / z[n - 1];
  for (auto& v : z) v *= scale;
  z[n - 1] = z_max;
  return z;
}

// Gauss-Legendre 3-point rule on [-1, 1].
constexpr std::array<double, 3> kGl3x{-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr std::array<double, 3> kGl3w{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

std::vector<double> cubic_weights(const GradedGrid& g) {
  const std::size_t n = g.size();
  std::vector<double> w(n, 0.0);
  for (std::size_t c = 0; c + 1 < n; ++c) {
    const std::size_t first = stencil_start(c, n);
    const double a = g.nodes[c];
    const double b = g.nodes[c + 1];
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t q = 0; q < 3; ++q) {
      const auto basis = stencil_basis(g, first, mid + half * kGl3x[q]);
      for (std::size_t k = 0; k < 4; ++k) w[first + k] += half * kGl3w[q] * basis[k];
    }
  }
  return w;
}

struct FftPlan {
  std::size_t nx = 0;
  double* real_buf = nullptr;
  fftw_complex* cplx_buf = nullptr;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;

  explicit FftPlan(std::size_t n) : nx(n) {
    real_buf = fftw_alloc_real(n);
    cplx_buf = fftw_alloc_complex(n / 2 + 1);
    // FFTW_ESTIMATE keeps plan selection (and therefore rounding) reproducible.
    r2c = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_buf, cplx_buf, FFTW_ESTIMATE);
    c2r = fftw_plan_dft_c2r_1d(static_cast<int>(n), cplx_buf, real_buf, FFTW_ESTIMATE);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan() {
    fftw_destroy_plan(r2c);
    fftw_destroy_plan(c2r);
    fftw_free(real_buf);
    fftw_free(cplx_buf);
  }
};

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

FftPlan& plan_for(std::size_t nx) {
  static std::map<std::size_t, std::unique_ptr<FftPlan>> cache;
  auto& slot = cache[nx];
  if (!slot) slot = std::make_unique<FftPlan>(nx);
  return *slot;
}

void check_nx(std::size_t nx, int k) {
  if (!is_power_of_two(nx) || nx < 4) {
    throw DomainError("x resolution must be a power of two >= 4, got " + std::to_string(nx));
  }
  if (nx < static_cast<std::size_t>(4 * k)) {
    throw DomainError("x resolution " + std::to_string(nx) + " below 4K for K=" + std::to_string(k));
  }
}

}  // namespace

double GradedGrid::max_cell() const {
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < size(); ++i) m = std::max(m, cell(i));
  return m;
}

std::size_t GradedGrid::count_below(double z) const {
  return static_cast<std::size_t>(std::upper_bound(nodes.begin(), nodes.end(), z) - nodes.begin());
}

GradedGrid build_graded_grid(double z_max, std::size_t n_nodes, double delta_ref) {
  if (!std::isfinite(z_max) || !std::isfinite(delta_ref) || z_max <= 0.0 || delta_ref <= 0.0) {
    throw DomainError("build_graded_grid: z_max and delta_ref must be positive and finite");
  }
  if (delta_ref >= z_max) throw DomainError("build_graded_grid: delta_ref must be below z_max");
  if (n_nodes < 32) throw DomainError("build_graded_grid: need at least 32 nodes");

  GradedGrid g;
  g.z_max = z_max;
  g.delta_ref = delta_ref;
  // first cell shrinks with n so that refinement halves every cell, not only the outer ones
  double h0 = delta_ref * std::min(0.1, 32.0 / static_cast<double>(n_nodes));
  for (int attempt = 0; attempt < 80; ++attempt) {
    g.nodes = geometric_nodes(z_max, n_nodes, h0);
    if (g.count_below(delta_ref) >= 8 && g.first_cell() <= delta_ref / 8.0) break;
    h0 *= 0.5;
  }
  if (g.count_below(delta_ref) < 8) {
    throw DomainError("build_graded_grid: cannot place 8 nodes below delta_ref with " +
                      std::to_string(n_nodes) + " nodes");
  }
  g.weights = cubic_weights(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i > 0 && !(g.nodes[i] > g.nodes[i - 1])) throw NumericalError("grid nodes not increasing");
    if (!(g.weights[i] > 0.0)) throw NumericalError("non-positive quadrature weight");
  }
  return g;
}

std::size_t stencil_start(std::size_t cell, std::size_t n_nodes) {
  if (cell == 0) return 0;
  return std::min(cell - 1, n_nodes - 4);
}

std::array<double, 4> stencil_basis(const GradedGrid& grid, std::size_t first, double y) {
  const double* x = grid.nodes.data() + first;
  std::array<double, 4> l{};
  for (std::size_t k = 0; k < 4; ++k) {
    double num = 1.0;
    double den = 1.0;
    for (std::size_t m = 0; m < 4; ++m) {
      if (m == k) continue;
      num *= (y - x[m]);
      den *= (x[k] - x[m]);
    }
    l[k] = num / den;
  }
  return l;
}

template <typename T>
T interpolate(const GradedGrid& grid, std::span<const T> values, double y) {
  const std::size_t n = grid.size();
  y = std::clamp(y, 0.0, grid.z_max);
  auto it = std::upper_bound(grid.nodes.begin(), grid.nodes.end(), y);
  std::size_t cell = (it == grid.nodes.begin()) ? 0 : static_cast<std::size_t>(it - grid.nodes.begin()) - 1;
  cell = std::min(cell, n - 2);
  const std::size_t first = stencil_start(cell, n);
  const auto basis = stencil_basis(grid, first, y);
  T out{};
  for (std::size_t k = 0; k < 4; ++k) out += basis[k] * values[first + k];
  return out;
}

template double interpolate<double>(const GradedGrid&, std::span<const double>, double);
template cd interpolate<cd>(const GradedGrid&, std::span<const cd>, double);

double integrate(const GradedGrid& grid, std::span<const double> values) {
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) s += grid.weights[i] * values[i];
  return s;
}

cd integrate(const GradedGrid& grid, std::span<const cd> values) {
  cd s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) s += grid.weights[i] * values[i];
  return s;
}

double integrate_abs(const GradedGrid& grid, std::span<const cd> values) {
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) s += grid.weights[i] * std::abs(values[i]);
  return s;
}

template <typename T>
std::vector<T> dz(const GradedGrid& grid, std::span<const T> f) {
  const std::size_t n = grid.size();
  if (n < 3 || f.size() != n) throw DomainError("dz: need at least 3 nodes matching the grid");
  const auto& z = grid.nodes;
  std::vector<T> d(n);
  auto one_sided = [&](std::size_t i0, std::size_t i1, std::size_t i2) {
    // derivative at z[i0] of the quadratic through (i0, i1, i2)
    const double a = z[i1] - z[i0];
    const double b = z[i2] - z[i0];
    return f[i0] * (-(a + b) / (a * b)) + f[i1] * (b / (a * (b - a))) + f[i2] * (-a / (b * (b - a)));
  };
  d[0] = one_sided(0, 1, 2);
  d[n - 1] = one_sided(n - 1, n - 2, n - 3);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hm = z[i] - z[i - 1];
    const double hp = z[i + 1] - z[i];
    d[i] = f[i - 1] * (-hp / (hm * (hm + hp))) + f[i] * ((hp - hm) / (hm * hp)) +
           f[i + 1] * (hm / (hp * (hm + hp)));
  }
  return d;
}

template std::vector<double> dz<double>(const GradedGrid&, std::span<const double>);
template std::vector<cd> dz<cd>(const GradedGrid&, std::span<const cd>);

Profile conormal_derivative(std::span<const cd> f, const GradedGrid& grid) {
  auto d = dz<cd>(grid, f);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] *= psi(grid.nodes[i]);
  return d;
}

// ---------------------------------------------------------------------------

SpectralField::SpectralField(std::shared_ptr<const GradedGrid> grid, int truncation, bool reality)
    : grid_(std::move(grid)), k_(truncation), reality_(reality) {
  if (!grid_) throw DomainError("SpectralField: null grid");
  if (truncation < 0) throw DomainError("SpectralField: negative truncation");
  modes_.assign(static_cast<std::size_t>(2 * k_ + 1), Profile(grid_->size(), cd{}));
}

void SpectralField::enforce_reality() {
  for (int a = 1; a <= k_; ++a) {
    const auto& pos = mode(a);
    auto& neg = mode(-a);
    for (std::size_t j = 0; j < pos.size(); ++j) neg[j] = std::conj(pos[j]);
  }
  for (auto& v : mode(0)) v = cd(v.real(), 0.0);
  reality_ = true;
}

double SpectralField::reality_defect() const {
  double scale = 0.0;
  for (const auto& m : modes_)
    for (const auto& v : m) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  double defect = 0.0;
  for (int a = 0; a <= k_; ++a) {
    const auto& pos = mode(a);
    const auto& neg = mode(-a);
    for (std::size_t j = 0; j < pos.size(); ++j) defect = std::max(defect, std::abs(neg[j] - std::conj(pos[j])));
  }
  return defect / scale;
}

bool SpectralField::same_shape(const SpectralField& other) const {
  if (k_ != other.k_) return false;
  return grid_ == other.grid_ || (grid_ && other.grid_ && grid_->nodes == other.grid_->nodes);
}

SpectralField SpectralField::zeros_like() const { return SpectralField(grid_, k_, reality_); }

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  axpy(1.0, other);
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  axpy(-1.0, other);
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (auto& m : modes_)
    for (auto& v : m) v *= s;
  return *this;
}

void SpectralField::axpy(double s, const SpectralField& other) {
  if (!same_shape(other)) throw DomainError("SpectralField: shape mismatch");
  for (std::size_t m = 0; m < modes_.size(); ++m)
    for (std::size_t j = 0; j < modes_[m].size(); ++j) modes_[m][j] += s * other.modes_[m][j];
  reality_ = reality_ && other.reality_;
}

SpectralField SpectralField::dx() const {
  SpectralField out = zeros_like();
  for (int a = -k_; a <= k_; ++a) {
    const cd fac(0.0, static_cast<double>(a));
    const auto& src = mode(a);
    auto& dst = out.mode(a);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] = fac * src[j];
  }
  return out;
}

bool SpectralField::all_finite() const {
  for (const auto& m : modes_)
    for (const auto& v : m)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

// ---------------------------------------------------------------------------

PhysicalField::PhysicalField(std::shared_ptr<const GradedGrid> g, std::size_t nx_)
    : grid(std::move(g)), nx(nx_), values(nx_ * grid->size(), 0.0) {
  if (!is_power_of_two(nx) || nx < 4) throw DomainError("PhysicalField: nx must be a power of two >= 4");
}

double PhysicalField::x(std::size_t ix) const {
  return 2.0 * std::numbers::pi * static_cast<double>(ix) / static_cast<double>(nx);
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t default_nx(int truncation) {
  std::size_t nx = 4;
  while (nx < static_cast<std::size_t>(4 * truncation)) nx *= 2;
  return nx;
}

SpectralField forward_transform(const PhysicalField& f, int truncation) {
  if (!f.grid || f.values.size() != f.nx * f.grid->size()) throw DomainError("forward_transform: mismatched grid shape");
  check_nx(f.nx, truncation);
  SpectralField out(f.grid, truncation, true);
  std::lock_guard lock(plan_mutex());
  FftPlan& p = plan_for(f.nx);
  const double inv = 1.0 / static_cast<double>(f.nx);
  for (std::size_t j = 0; j < f.grid->size(); ++j) {
    std::copy_n(f.values.data() + j * f.nx, f.nx, p.real_buf);
    fftw_execute(p.r2c);
    for (int a = 0; a <= truncation; ++a) {
      const cd v(p.cplx_buf[a][0] * inv, p.cplx_buf[a][1] * inv);
      out.mode(a)[j] = v;
      if (a > 0) out.mode(-a)[j] = std::conj(v);
    }
    out.mode(0)[j] = cd(out.mode(0)[j].real(), 0.0);
  }
  return out;
}

PhysicalField inverse_transform(const SpectralField& f, std::size_t nx) {
  check_nx(nx, f.truncation());
  if (!f.reality() && f.reality_defect() > 1e-12) {
    throw DomainError("inverse_transform: field is not conjugate-symmetric");
  }
  PhysicalField out(f.grid_ptr(), nx);
  std::lock_guard lock(plan_mutex());
  FftPlan& p = plan_for(nx);
  const int k = f.truncation();
  for (std::size_t j = 0; j < f.n_nodes(); ++j) {
    for (std::size_t a = 0; a <= nx / 2; ++a) {
      p.cplx_buf[a][0] = 0.0;
      p.cplx_buf[a][1] = 0.0;
    }
    for (int a = 0; a <= k; ++a) {
      const cd v = f.mode(a)[j];
      p.cplx_buf[a][0] = v.real();
      p.cplx_buf[a][1] = (a == 0) ? 0.0 : v.imag();
    }
    fftw_execute(p.c2r);
    std::copy_n(p.real_buf, nx, out.values.data() + j * nx);
  }
  return out;
}

}  // namespace hsns
