#pragma once

// Monte Carlo engine for elliptically contoured populations: sampling via
// the stochastic representation X = mu + sqrt(Sigma) * R * U, empirical
// conditional dependence matrices of four kinds, the quantile split that
// best balances tail and center, and the Student-t degrees-of-freedom
// sweep experiment.

#include "eqpart/rng.hpp"
#include "eqpart/sample_block.hpp"
#include "eqpart/truncated.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace eqpart {

// Law of the radius R in the elliptic representation.  chi(n) recovers
// the multivariate normal; sqrt(n * Fisher(n, nu)) recovers Student-t
// with nu degrees of freedom.  Draws are always >= 0.
class RadialDistribution {
public:
    static RadialDistribution chi_for_normal(int n);
    static RadialDistribution f_scaled_for_student(int n, int nu);
    static RadialDistribution custom(std::function<double(Rng&)> sampler, std::string id);

    double draw(Rng& rng) const { return sampler_(rng); }
    const std::string& id() const { return id_; }

private:
    RadialDistribution(std::function<double(Rng&)> sampler, std::string id)
        : sampler_(std::move(sampler)), id_(std::move(id)) {}

    std::function<double(Rng&)> sampler_;
    std::string id_;
};

// Bounds on the pairwise correlation magnitudes of generated scale
// matrices (rejection sampling keeps |corr| inside [min, max]).
struct ScaleMatrixConstraint {
    double min_abs_corr = 0.2;
    double max_abs_corr = 0.8;
};

struct QuasiEquilibriumResult {
    double q_hat = 0.0;             // split minimizing the tail/center distance
    double objective_value = 0.0;   // Frobenius distance at q_hat
    MatrixKind kind = MatrixKind::covariance;
    std::vector<std::pair<double, double>> curve;  // sampled (q, distance)
    // True when the curve is statistically consistent with pure sampling
    // noise, i.e. no split is meaningfully better than another (e.g.
    // independent coordinates measured by correlation).  Heuristic: the
    // median of the curve, normalized by the per-q sampling-noise floor
    // sqrt(c_kind (1/n_tail + 1/n_center)), fails to exceed 1.8; noise
    // curves sit near 1 by construction, real structure well above.
    bool degenerate = false;
};

// Evaluation grid for quasi_equilibrium: lo, lo+step, ..., up to hi
// (inclusive within half a step), then golden-section refinement of the
// best bracket down to refine_tol.
struct QGridSpec {
    double lo = 0.010;
    double hi = 0.490;
    double step = 0.005;
    double refine_tol = 1e-4;
};

struct StudentSweepRow {
    int nu = 0;
    double q10 = 0.0;   // 0.1 quantile of the fitted splits
    double q50 = 0.0;   // median
    double q90 = 0.0;   // 0.9 quantile
};

// Draws N columns mu + S r u, where S is the symmetric square root of
// sigma, u is uniform on the unit sphere (a normalized vector of iid
// normals) and r is an independent radial draw.  Reproducible: the same
// (seed, radial id, model, N) always yields a bit-identical block.
// Throws DomainError if sigma is not symmetric positive definite.
SampleBlock sample_elliptic(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                            const RadialDistribution& radial, std::int64_t count,
                            std::uint64_t seed);

// Random correlation matrix with all pairwise correlation magnitudes
// inside the constraint bounds: a rotation-invariant Wishart draw is
// normalized to unit diagonal and rejected until it satisfies the
// constraint.  Throws ConvergenceError when max_tries rejections pass
// without a hit (infeasible constraints), DomainError for bad arguments.
Eigen::MatrixXd random_scale_matrix(int n, const ScaleMatrixConstraint& constraint,
                                    std::uint64_t seed, int max_tries = 100000);

// Dependence matrix of the observations whose benchmark coordinate falls
// in the given quantile band of the empirical benchmark distribution.
// Band membership is by order statistics: ranks (ceil(q1 N), ceil(q2 N)]
// of the benchmark row, ties broken by column index.  kind selects
// covariance (denominator M-1), correlation, Spearman (midrank
// correlation) or Kendall (tau-b via merge-sort inversion counting).
// Throws InsufficientDataError when the band holds fewer than 30 columns.
ConditionalMatrix empirical_conditional_matrix(const SampleBlock& sample,
                                               const QuantileInterval& interval,
                                               MatrixKind kind);

// Scans Dist(q) = ||M_[0,q] - M_[q,1-q]||_F over the grid, then refines
// the best bracket by golden section; returns the minimizing split, the
// distance there, the full curve, and a degeneracy flag for flat curves.
QuasiEquilibriumResult quasi_equilibrium(const SampleBlock& sample, MatrixKind kind,
                                         const QGridSpec& grid = {});

// Entrywise Euclidean norm of a - b; requires matching dimensions and kind.
double frobenius_distance(const ConditionalMatrix& a, const ConditionalMatrix& b);

// For each nu: draws matrices_per_nu random constrained scale matrices,
// samples N Student-t(nu) observations each, fits the balancing split with
// kind=correlation, and reports the 0.1/0.5/0.9 quantiles of the splits.
// Work is split into one task per (nu, matrix) cell with independently
// derived seeds, so results do not depend on the thread count.
std::vector<StudentSweepRow> student_sweep(int n, const std::vector<int>& nus,
                                           int matrices_per_nu, std::int64_t count,
                                           std::uint64_t seed, int threads = 1);

} // namespace eqpart
