#pragma once

// Solvers for the symmetric quantile split at which the conditional
// dependence structure of a normal population is the same in every group,
// plus reporting and an empirical distance diagnostic.

#include "eqpart/sample_block.hpp"
#include "eqpart/truncated.hpp"

#include <utility>
#include <vector>

namespace eqpart {

struct EquilibriumReport {
    // Interior quantile cut points, ascending, in (0,1); symmetric about
    // 0.5 for the symmetric solvers.
    std::vector<double> splits;
    // Standardized benchmark value of the first cut; for the classic
    // three-group split this is the root of balance_equation_3.
    double root_x = 0.0;
    // Maximum pairwise discrepancy across groups: conditional variances
    // (standard units) for the solvers, Frobenius distance between
    // conditional covariance matrices for balance_report.
    double residual = 0.0;
    // One entry per group, ascending: the quantile band and the benchmark
    // moments conditioned on it.  The solvers report standard-normal
    // moments; balance_report reports moments in model units.
    std::vector<std::pair<QuantileInterval, TruncatedMoments>> groups;
    // Conditional covariance matrices per group; filled only when a model
    // is supplied (balance_report).
    std::vector<ConditionalMatrix> conditional_matrices;
};

// The balance gap for the three-group symmetric split:
//   g(x) = -x Phi(x) - phi(x) (1 - 2 Phi(x)).
// Its unique negative root is the standardized cut at which the variance
// of the lower-tail group equals the variance of the central group.
double balance_equation_3(double x);

// Three-group equilibrium: cut quantile q = Phi(x) with x the negative
// root of balance_equation_3, bracketed on [-3, -0.1] and solved to
// |g| <= 1e-14.  All three conditional variances then agree to <= 1e-12.
EquilibriumReport solve_equilibrium_3();

// k-group generalization for odd k >= 3: finds symmetric standardized
// cuts x_1 < ... < x_m < 0 (m = (k-1)/2) such that the conditional
// variances of all k bands agree; residual <= 1e-10.  A damped Newton
// iteration with finite-difference Jacobian runs first; if it stalls, a
// nested bisection on the outermost cut rebuilds the iterate and Newton
// is restarted.  Throws DomainError for even or < 3 k, ConvergenceError
// (with the best iterate in the message) if both stages fail.
EquilibriumReport solve_equilibrium_k(int k);

// Evaluates how balanced a model is at the given interior splits: fills
// per-group moments and conditional covariance matrices, and sets
// residual = max over group pairs of the Frobenius distance between
// conditional covariances.  splits must be strictly ascending in (0,1).
EquilibriumReport balance_report(const GaussianModel& model,
                                 const std::vector<double>& splits);

// Empirical counterpart of the balance residual, used as a distance-from-
// normality diagnostic: Frobenius norm between the sample covariance of
// the [0,q] band and of the [q,1-q] band, conditioning on order statistics
// of the benchmark row.  Requires q in (0,0.5) and at least 100
// observations in each band (InsufficientDataError otherwise).
double normality_distance(const SampleBlock& sample, double q);

} // namespace eqpart
