#pragma once

// Scalar Gaussian special functions: density, distribution function,
// quantile function and the bivariate distribution function used by the
// copula machinery.  Everything here is pure and thread-safe.

namespace eqpart {

inline constexpr double kSqrt2      = 1.41421356237309504880168872420969808;  // sqrt(2)
inline constexpr double kSqrtPi     = 1.77245385090551602729816748334114518;  // sqrt(pi)
inline constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438187;  // 1/sqrt(2 pi)
inline constexpr double kTwoPi      = 6.28318530717958647692528676655900577;  // 2 pi

// Standard normal density phi(x) = exp(-x^2/2)/sqrt(2 pi).
// phi(+-inf) = 0 by the usual limit convention.
double norm_pdf(double x) noexcept;

// Standard normal distribution function Phi(x), evaluated as
// 0.5*erfc(-x/sqrt(2)) so the lower tail keeps full relative accuracy.
// Phi(-inf) = 0 and Phi(+inf) = 1.  NaN input throws DomainError.
double norm_cdf(double x);

// Inverse of norm_cdf on (0,1).  Rational minimax initial estimate
// (accurate to ~1e-16 already) polished with one Newton step through
// norm_cdf/norm_pdf so that norm_cdf(norm_quantile(p)) round-trips at
// machine precision.  Throws DomainError unless 0 < p < 1.
double norm_quantile(double p);

// Density of the bivariate standard normal with correlation r at (x, y).
// Throws DomainError for |r| >= 1.
double bvn_pdf(double x, double y, double r);

// Distribution function of the bivariate standard normal:
//   P(X <= x, Y <= y) with corr(X, Y) = r,  r in (-1, 1).
// Evaluated through the Drezner-Wesolowsky / Genz single-integral
// reduction with 6/12/20-point Gauss-Legendre rules; absolute error is
// below ~5e-16 for |r| < 0.925 and ~5e-11 beyond.  Either argument may
// be +-inf (the marginal limit is returned).  Throws DomainError if
// |r| >= 1 or any input is NaN.
double bvn_cdf(double x, double y, double r);

} // namespace eqpart
