#pragma once

namespace hsns {

/// Scaled complementary error function e^{x^2} erfc(x).
///
/// Direct product for x <= 5, Laplace continued fraction up to x = 50 and the
/// three-term asymptotic series beyond.
double erfcx(double x);

/// e^{a} erfc(x) without overflow or cancellation in the product.
double exp_erfc(double a, double x);

/// Standard Gaussian heat kernel on the line, (4 pi tau)^{-1/2} e^{-w^2 / 4 tau}.
double heat_gaussian(double tau, double w);

}  // namespace hsns
