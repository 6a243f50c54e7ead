#pragma once

// Closed-form moments of the benchmark-truncated normal and the rank-one
// update giving the covariance of a multivariate normal conditioned on its
// first ("benchmark") coordinate falling between two of its quantiles.

#include "eqpart/errors.hpp"

#include <Eigen/Dense>

#include <string>

namespace eqpart {

// Mean vector plus SPD covariance/scale matrix.  Construction verifies
// symmetry and positive definiteness (via a Cholesky attempt).
struct GaussianModel {
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;

    GaussianModel(Eigen::VectorXd mu_in, Eigen::MatrixXd sigma_in);

    int dim() const { return static_cast<int>(mu.size()); }
};

// A quantile band [q1, q2] for the benchmark coordinate; q1 = 0 and
// q2 = 1 denote unbounded tails.
struct QuantileInterval {
    double q1;
    double q2;

    QuantileInterval(double q1_in, double q2_in);

    double width() const { return q2 - q1; }
};

// First two moments of the benchmark coordinate under truncation.
struct TruncatedMoments {
    double mean;
    double variance;
};

enum class MatrixKind { covariance, correlation, spearman, kendall };

std::string to_string(MatrixKind kind);
MatrixKind matrix_kind_from_string(const std::string& name);

// A dependence matrix of the population restricted to a quantile band of
// the benchmark coordinate.
struct ConditionalMatrix {
    MatrixKind kind;
    QuantileInterval interval;
    Eigen::MatrixXd matrix;
};

// Regression coefficients of each coordinate on the benchmark:
// beta[0] = 1, beta[i] = sigma(0,i)/sigma(0,0).  Throws DomainError if the
// benchmark variance is not positive.
Eigen::VectorXd beta_vector(const GaussianModel& model);

// Moments of a standard normal truncated to [a, b], where either endpoint
// may be +-inf:
//   Z        = Phi(b) - Phi(a)
//   mean     = (phi(a) - phi(b)) / Z
//   E[X^2]   = 1 + (a phi(a) - b phi(b)) / Z      (x*phi(x) -> 0 at +-inf)
//   variance = E[X^2] - mean^2, accumulated with compensated summation
//              because the three terms nearly cancel for narrow bands.
// Throws DomainError when Z underflows below 1e-12 (an effectively empty
// interval would only return cancellation noise).
TruncatedMoments truncated_moments_std(double a, double b);

// Covariance of the model conditioned on the benchmark lying in its
// [q1, q2] quantile band:  Sigma_B = Sigma + (v_B - sigma11) * beta beta^T,
// where v_B is the conditional benchmark variance.  Only the benchmark's
// own truncated variance enters; the quantile band is mapped through the
// benchmark's own marginal, so the result does not depend on mu.
ConditionalMatrix conditional_covariance(const GaussianModel& model,
                                         const QuantileInterval& interval);

// conditional_covariance normalized to unit diagonal.
ConditionalMatrix conditional_correlation(const GaussianModel& model,
                                          const QuantileInterval& interval);

} // namespace eqpart
