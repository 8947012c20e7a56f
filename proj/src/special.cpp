#include "hsns/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace hsns {

double erfcx(double x) {
  if (std::isnan(x)) return x;
  if (x <= 5.0) return std::exp(x * x) * std::erfc(x);
  constexpr double inv_sqrt_pi = 0.5641895835477563;  // 1/sqrt(pi)
  if (x <= 50.0) {
    // erfc(x) e^{x^2} sqrt(pi) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    double tail = x;
    for (int k = 80; k >= 1; --k) tail = x + 0.5 * k / tail;
    return inv_sqrt_pi / tail;
  }
  const double r = 1.0 / (x * x);
  return inv_sqrt_pi / x * (1.0 - 0.5 * r + 0.75 * r * r);
}

double exp_erfc(double a, double x) {
  if (x > 0.0) {
    const double e = a - x * x;
    if (e < -745.0) return 0.0;
    return erfcx(x) * std::exp(e);
  }
  if (a > 709.0) return std::numeric_limits<double>::infinity();
  return std::exp(a) * std::erfc(x);
}

double heat_gaussian(double tau, double w) {
  return std::exp(-w * w / (4.0 * tau)) / std::sqrt(4.0 * std::numbers::pi * tau);
}

}  // namespace hsns
