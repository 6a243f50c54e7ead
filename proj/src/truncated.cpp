#include "eqpart/truncated.hpp"
#include "eqpart/gaussian.hpp"

#include <cmath>
#include <limits>

namespace eqpart {

namespace {

constexpr double kMinMass = 1e-12;

// Neumaier-compensated sum: accurate even when terms cancel almost
// completely, as they do for the variance of a very narrow band.
double compensated_sum(std::initializer_list<double> terms) {
    double sum = 0.0;
    double comp = 0.0;
    for (double t : terms) {
        const double next = sum + t;
        if (std::fabs(sum) >= std::fabs(t)) {
            comp += (sum - next) + t;
        } else {
            comp += (t - next) + sum;
        }
        sum = next;
    }
    return sum + comp;
}

// x*phi(x) with the limit convention (+-inf)*phi(+-inf) = 0.
double x_pdf(double x) {
    if (std::isinf(x)) return 0.0;
    return x * norm_pdf(x);
}

// Band probability Phi(b) - Phi(a), reflected into the lower tail when
// both endpoints are positive so the subtraction never cancels against 1.
double band_mass(double a, double b) {
    if (a >= 0.0) return norm_cdf(-a) - norm_cdf(-b);
    return norm_cdf(b) - norm_cdf(a);
}

} // namespace

GaussianModel::GaussianModel(Eigen::VectorXd mu_in, Eigen::MatrixXd sigma_in)
    : mu(std::move(mu_in)), sigma(std::move(sigma_in)) {
    const auto n = mu.size();
    if (n < 1) throw DomainError("GaussianModel: dimension must be >= 1");
    if (sigma.rows() != n || sigma.cols() != n) {
        throw DomainError("GaussianModel: sigma shape does not match mu");
    }
    if (!sigma.isApprox(sigma.transpose(), 1e-12)) {
        throw DomainError("GaussianModel: sigma is not symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) {
        throw DomainError("GaussianModel: sigma is not positive definite");
    }
}

QuantileInterval::QuantileInterval(double q1_in, double q2_in) : q1(q1_in), q2(q2_in) {
    if (!(q1 >= 0.0 && q1 < q2 && q2 <= 1.0)) {
        throw DomainError("QuantileInterval: need 0 <= q1 < q2 <= 1");
    }
}

std::string to_string(MatrixKind kind) {
    switch (kind) {
        case MatrixKind::covariance: return "covariance";
        case MatrixKind::correlation: return "correlation";
        case MatrixKind::spearman: return "spearman";
        case MatrixKind::kendall: return "kendall";
    }
    throw DomainError("to_string: unknown matrix kind");
}

MatrixKind matrix_kind_from_string(const std::string& name) {
    if (name == "covariance") return MatrixKind::covariance;
    if (name == "correlation") return MatrixKind::correlation;
    if (name == "spearman") return MatrixKind::spearman;
    if (name == "kendall") return MatrixKind::kendall;
    throw DomainError("matrix kind must be covariance|correlation|spearman|kendall, got '" +
                      name + "'");
}

Eigen::VectorXd beta_vector(const GaussianModel& model) {
    const double s11 = model.sigma(0, 0);
    if (!(s11 > 0.0)) {
        throw DomainError("beta_vector: benchmark variance must be positive");
    }
    Eigen::VectorXd beta = model.sigma.row(0).transpose() / s11;
    beta(0) = 1.0;
    return beta;
}

TruncatedMoments truncated_moments_std(double a, double b) {
    if (std::isnan(a) || std::isnan(b) || !(a < b)) {
        throw DomainError("truncated_moments_std: need a < b");
    }
    const double mass = band_mass(a, b);
    if (!(mass > kMinMass)) {
        throw DomainError("truncated_moments_std: interval mass below 1e-12");
    }
    const double pa = norm_pdf(a);
    const double pb = norm_pdf(b);
    const double mean = (pa - pb) / mass;
    // E[X^2] - mean^2 = 1 + (a phi(a) - b phi(b))/Z - mean^2; the three
    // terms cancel to O(width^2) for narrow bands, hence the compensation.
    const double variance =
        compensated_sum({1.0, (x_pdf(a) - x_pdf(b)) / mass, -mean * mean});
    return {mean, variance};
}

ConditionalMatrix conditional_covariance(const GaussianModel& model,
                                         const QuantileInterval& interval) {
    const Eigen::VectorXd beta = beta_vector(model);
    const double s11 = model.sigma(0, 0);
    const double a = interval.q1 <= 0.0 ? -std::numeric_limits<double>::infinity()
                                        : norm_quantile(interval.q1);
    const double b = interval.q2 >= 1.0 ? std::numeric_limits<double>::infinity()
                                        : norm_quantile(interval.q2);
    const TruncatedMoments std_moments = truncated_moments_std(a, b);
    const double v_band = s11 * std_moments.variance;
    Eigen::MatrixXd result = model.sigma + (v_band - s11) * (beta * beta.transpose());
    // Symmetrize away the last-bit asymmetry of the outer-product update.
    result = 0.5 * (result + result.transpose()).eval();
    return {MatrixKind::covariance, interval, std::move(result)};
}

ConditionalMatrix conditional_correlation(const GaussianModel& model,
                                          const QuantileInterval& interval) {
    ConditionalMatrix cond = conditional_covariance(model, interval);
    const auto n = cond.matrix.rows();
    Eigen::VectorXd inv_sd(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double v = cond.matrix(i, i);
        if (!(v > 0.0)) {
            throw DomainError("conditional_correlation: conditional variance not positive");
        }
        inv_sd(i) = 1.0 / std::sqrt(v);
    }
    cond.matrix = (inv_sd.asDiagonal() * cond.matrix * inv_sd.asDiagonal()).eval();
    for (Eigen::Index i = 0; i < n; ++i) cond.matrix(i, i) = 1.0;
    cond.kind = MatrixKind::correlation;
    return cond;
}

} // namespace eqpart
