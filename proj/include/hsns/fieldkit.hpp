#pragma once

// Grids, Fourier transforms in x, field containers and z-derivatives shared by
// every other module. Profiles are sampled on a boundary-refined grid over
// [0, z_max]; x is periodic on [0, 2*pi).

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace hsns {

using cd = std::complex<double>;
using Profile = std::vector<cd>;

/// Boundary-refined nodes on [0, z_max] with nodal quadrature weights.
///
/// Cells grow geometrically from the wall. The weights integrate the
/// piecewise-cubic interpolant of the nodal values exactly, so the same
/// nodes double as collocation points for kernel product integration.
struct GradedGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  double z_max = 0.0;
  double delta_ref = 0.0;

  std::size_t size() const { return nodes.size(); }
  double cell(std::size_t i) const { return nodes[i + 1] - nodes[i]; }
  double first_cell() const { return cell(0); }
  double max_cell() const;
  /// Number of nodes in [0, z].
  std::size_t count_below(double z) const;
};

GradedGrid build_graded_grid(double z_max, std::size_t n_nodes, double delta_ref);

/// Index of the first node of the 4-point interpolation stencil for cell i.
std::size_t stencil_start(std::size_t cell, std::size_t n_nodes);

/// Lagrange basis values of the 4-point stencil starting at `first`, at y.
std::array<double, 4> stencil_basis(const GradedGrid& grid, std::size_t first, double y);

/// Piecewise-cubic interpolation of nodal values at y (clamped to the grid).
template <typename T>
T interpolate(const GradedGrid& grid, std::span<const T> values, double y);

double integrate(const GradedGrid& grid, std::span<const double> values);
cd integrate(const GradedGrid& grid, std::span<const cd> values);
double integrate_abs(const GradedGrid& grid, std::span<const cd> values);

/// dz f on the graded grid: 3-point central differences inside, one-sided
/// 3-point at the ends; second order in the local cell size.
template <typename T>
std::vector<T> dz(const GradedGrid& grid, std::span<const T> f);

/// psi(z) dz f with psi(z) = z / (1 + z).
Profile conormal_derivative(std::span<const cd> f, const GradedGrid& grid);

inline double psi(double z) { return z / (1.0 + z); }

/// Fourier-in-x fields: mode alpha in -K..K carries a complex profile.
class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(std::shared_ptr<const GradedGrid> grid, int truncation, bool reality = true);

  int truncation() const { return k_; }
  std::size_t n_nodes() const { return grid_->size(); }
  const GradedGrid& grid() const { return *grid_; }
  const std::shared_ptr<const GradedGrid>& grid_ptr() const { return grid_; }

  bool reality() const { return reality_; }
  void set_reality(bool r) { reality_ = r; }

  Profile& mode(int alpha) { return modes_.at(static_cast<std::size_t>(alpha + k_)); }
  const Profile& mode(int alpha) const { return modes_.at(static_cast<std::size_t>(alpha + k_)); }

  /// Overwrite modes -alpha < 0 by conj(mode alpha).
  void enforce_reality();
  /// Max relative conjugate-symmetry defect over all modes.
  double reality_defect() const;

  bool same_shape(const SpectralField& other) const;
  SpectralField zeros_like() const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double s);
  /// this += s * other
  void axpy(double s, const SpectralField& other);

  /// d/dx: mode alpha multiplied by i*alpha.
  SpectralField dx() const;

  bool all_finite() const;

 private:
  std::shared_ptr<const GradedGrid> grid_;
  int k_ = 0;
  bool reality_ = true;
  std::vector<Profile> modes_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

/// Real values on the tensor grid x_i = 2*pi*i/nx, z_j = grid.nodes[j],
/// stored row-major by z: values[j * nx + i].
struct PhysicalField {
  std::shared_ptr<const GradedGrid> grid;
  std::size_t nx = 0;
  std::vector<double> values;

  PhysicalField() = default;
  PhysicalField(std::shared_ptr<const GradedGrid> g, std::size_t nx_);

  double& at(std::size_t ix, std::size_t jz) { return values[jz * nx + ix]; }
  double at(std::size_t ix, std::size_t jz) const { return values[jz * nx + ix]; }
  double x(std::size_t ix) const;
};

/// Smallest power of two that is >= max(4K, 4).
std::size_t default_nx(int truncation);
bool is_power_of_two(std::size_t n);

/// Forward transform: f_alpha(z) = (1/nx) sum_i f(x_i, z) e^{-i alpha x_i}, |alpha| <= K.
SpectralField forward_transform(const PhysicalField& f, int truncation);
/// Inverse transform of a real (conjugate-symmetric) field onto nx points.
PhysicalField inverse_transform(const SpectralField& f, std::size_t nx);

}  // namespace hsns
