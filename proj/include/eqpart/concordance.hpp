#pragma once

// Concordance measures (Spearman rho, Kendall tau) of a Gaussian pair
// after the first coordinate is conditioned to a quantile band, computed
// both by deterministic quadrature on the conditional copula and by Monte
// Carlo on conditioned draws; plus the tail-vs-center difference curves,
// the band split that balances them, and its r -> 0 limit constant.

#include "eqpart/truncated.hpp"

#include <cstdint>
#include <vector>

namespace eqpart {

// The copula of (X1, X2) | X1 in the [p,q] quantile band, where (X1, X2)
// is standard bivariate normal with correlation r:
//   C_[p,q](u, v) = (C((q-p)u + p, w) - C(p, w)) / (q - p),
// where C is the Gaussian copula and w solves
//   (C(q, w) - C(p, w)) / (q - p) = v.
struct ConditionalCopula {
    double r;   // correlation in (-1, 1)
    double p;   // band start, 0 <= p < q
    double q;   // band end, q <= 1
};

// Evaluates the conditional copula at (u, v) in [0,1]^2.  The margin
// equation above is strictly increasing in w, so w is found by bracketed
// bisection-plus-secant to near machine precision (well inside the 1e-10
// contract).  Throws DomainError for invalid parameters or arguments.
double conditional_copula_eval(const ConditionalCopula& cop, double u, double v);

enum class ConcordanceMethod { quadrature, monte_carlo };

// Monte Carlo estimate with a batch-means standard error (20 batches).
struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t count = 0;
};

// Sample size and seed used when the enum-method entry points pick the
// Monte Carlo route.
inline constexpr std::int64_t kDefaultMcCount = 1000000;
inline constexpr std::uint64_t kDefaultMcSeed = 20250822;

// Spearman rho of the conditional copula:
//   rho = -3 + 12 * integral of C_[p,q] over the unit square.
// quadrature: tensor Gauss-Legendre starting at 64 points per axis,
// doubled until successive estimates differ by < 1e-7.  monte_carlo:
// conditioned draws at the default count/seed, midrank correlation.
double conditional_spearman(double r, double p, double q, ConcordanceMethod method);

// Monte Carlo version with explicit sample count and seed; draws
// (x1, x2) with x1 inverse-sampled inside the band, so no rejection.
McEstimate conditional_spearman_mc(double r, double p, double q, std::int64_t count,
                                   std::uint64_t seed);

// Kendall tau of the conditional copula:
//   tau = -1 + 4 * integral of C_[p,q] dC_[p,q].
// quadrature: the copula density is obtained by mixed central differences
// of C_[p,q] (h = 1e-5, Richardson-extrapolated against h/2), and the
// double integral uses the same doubled Gauss-Legendre scheme.
// monte_carlo: pairwise concordance (tau-b) of conditioned draws.
double conditional_kendall(double r, double p, double q, ConcordanceMethod method);

McEstimate conditional_kendall_mc(double r, double p, double q, std::int64_t count,
                                  std::uint64_t seed);

// First-order coefficient of rho in r for the [p,q] band:
//   slope = 3 / ((q-p)^2 pi) *
//           (Phi(sqrt(2) x2) - Phi(sqrt(2) x1) - (q-p) sqrt(pi) (phi(x1)+phi(x2)))
// with x1 = Phi^{-1}(p), x2 = Phi^{-1}(q) (infinite at p=0 / q=1, using
// the phi/Phi limit conventions).  For (0,1) this reduces to 3/pi.
double taylor_slope_rho(double p, double q);

// Tail-minus-center differences at a symmetric split q:
//   delta_rho = rho_[0,q](r) - rho_[q,1-q](r), and likewise delta_tau.
struct ConcordanceCurvePoint {
    double q = 0.0;
    double r = 0.0;
    double delta_rho = 0.0;
    double delta_tau = 0.0;
};

ConcordanceCurvePoint delta_curves(double q, double r);

// The split A_kappa(r): the q in (0, 0.5) at which the tail and center
// concordances coincide (delta_kappa(q, r) = 0), for kappa = spearman or
// kendall.  A coarse scan (step 0.05 on [0.05, 0.45]) brackets every sign
// change at that resolution and each is bisected to |delta| <= 1e-6; the
// smallest root is returned and all of them are copied to *all_roots when
// given.  At r = 0 the limiting constant solve_qstar() is returned.
double equilibrium_curve_A(double r, MatrixKind kappa,
                           std::vector<double>* all_roots = nullptr);

// The r -> 0 limit of A_kappa: the root in (0, 0.5) of
//   (1-4q+6q^2) Phi(sqrt(2) Phi^{-1}(q))
//     - q (1-6q+8q^2) sqrt(pi) phi(Phi^{-1}(q)) - q^2 = 0,
// solved to 1e-10.
double solve_qstar();

} // namespace eqpart
