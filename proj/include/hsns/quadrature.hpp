#pragma once

// Fixed Gauss-Legendre rules on [-1, 1].

#include <array>
#include <cstddef>

namespace hsns::gl {

inline constexpr std::array<double, 8> x8{
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> w8{
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

/// Visit the 8-point rule on [a, b] split into m equal pieces: fn(y, weight).
template <typename Fn>
void for_each_point(double a, double b, std::size_t m, Fn&& fn) {
  const double piece = (b - a) / static_cast<double>(m);
  for (std::size_t s = 0; s < m; ++s) {
    const double lo = a + piece * static_cast<double>(s);
    const double half = 0.5 * piece;
    const double mid = lo + half;
    for (std::size_t q = 0; q < 8; ++q) fn(mid + half * x8[q], half * w8[q]);
  }
}

}  // namespace hsns::gl

#include <vector>

namespace hsns::gl {

struct Rule {
  std::vector<double> x;  // on [-1, 1]
  std::vector<double> w;
};

/// Full Gauss-Legendre rule with n in {4, 6, 8, 10, 12, 16, 20}.
Rule legendre(int n);

}  // namespace hsns::gl
