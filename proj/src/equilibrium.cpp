#include "eqpart/equilibrium.hpp"

#include "eqpart/elliptic_mc.hpp"
#include "eqpart/gaussian.hpp"
#include "eqpart/roots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

namespace eqpart {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Standardized cut vector -> the k = 2m+1 interval endpoints
// (-inf, x_1, ..., x_m, -x_m, ..., -x_1, +inf).
std::vector<double> cut_endpoints(const std::vector<double>& cuts) {
    std::vector<double> ends;
    ends.reserve(2 * cuts.size() + 2);
    ends.push_back(-kInf);
    for (double x : cuts) ends.push_back(x);
    for (auto it = cuts.rbegin(); it != cuts.rend(); ++it) ends.push_back(-*it);
    ends.push_back(kInf);
    return ends;
}

bool cuts_ordered(const std::vector<double>& cuts) {
    for (size_t i = 0; i < cuts.size(); ++i) {
        if (!(cuts[i] < 0.0)) return false;
        if (i > 0 && !(cuts[i - 1] < cuts[i])) return false;
    }
    return true;
}

// Adjacent variance gaps F_j = var(I_j) - var(I_{j+1}) over the first
// m+1 bands; by symmetry the mirrored bands repeat the same variances,
// so all k variances agree exactly when F = 0.
Eigen::VectorXd variance_gaps(const std::vector<double>& cuts) {
    const auto ends = cut_endpoints(cuts);
    const size_t m = cuts.size();
    Eigen::VectorXd gaps(static_cast<Eigen::Index>(m));
    double prev = truncated_moments_std(ends[0], ends[1]).variance;
    for (size_t j = 1; j <= m; ++j) {
        const double next = truncated_moments_std(ends[j], ends[j + 1]).variance;
        gaps(static_cast<Eigen::Index>(j - 1)) = prev - next;
        prev = next;
    }
    return gaps;
}

// Damped Newton with a forward-difference Jacobian on variance_gaps.
// Returns true when ||F||_inf <= tol; cuts holds the final iterate.
bool newton_refine(std::vector<double>& cuts, double tol, int max_iter) {
    const size_t m = cuts.size();
    Eigen::VectorXd f;
    try {
        f = variance_gaps(cuts);
    } catch (const DomainError&) {
        return false;
    }
    for (int iter = 0; iter < max_iter; ++iter) {
        double fnorm = f.lpNorm<Eigen::Infinity>();
        if (fnorm <= tol) return true;

        Eigen::MatrixXd jac(m, m);
        for (size_t i = 0; i < m; ++i) {
            const double h = 1e-7 * std::max(1.0, std::fabs(cuts[i]));
            std::vector<double> bumped = cuts;
            bumped[i] += h;
            if (!cuts_ordered(bumped)) {
                bumped = cuts;
                bumped[i] -= h;
            }
            const Eigen::VectorXd fb = variance_gaps(bumped);
            jac.col(static_cast<Eigen::Index>(i)) = (fb - f) / (bumped[i] - cuts[i]);
        }
        const Eigen::VectorXd step = jac.colPivHouseholderQr().solve(-f);
        if (!step.allFinite()) return false;

        // Backtrack until the residual shrinks and ordering is preserved.
        double scale = 1.0;
        bool accepted = false;
        for (int half = 0; half < 30; ++half, scale *= 0.5) {
            std::vector<double> trial = cuts;
            for (size_t i = 0; i < m; ++i) trial[i] += scale * step(static_cast<Eigen::Index>(i));
            if (!cuts_ordered(trial)) continue;
            Eigen::VectorXd ft;
            try {
                ft = variance_gaps(trial);
            } catch (const DomainError&) {
                continue;
            }
            if (ft.lpNorm<Eigen::Infinity>() < fnorm) {
                cuts = std::move(trial);
                f = std::move(ft);
                accepted = true;
                break;
            }
        }
        if (!accepted) return f.lpNorm<Eigen::Infinity>() <= tol;
    }
    return f.lpNorm<Eigen::Infinity>() <= tol;
}

// Nested bisection: given the outermost cut, each inner cut is solved so
// its band variance matches the outer tail's, and the outer cut is then
// bisected on the central band's variance mismatch.  Slower than Newton
// but monotone and immune to a poor starting point.
std::vector<double> nested_bisection(int m) {
    const auto chain = [m](double x1) -> std::vector<double> {
        // Builds cuts x_1..x_m with var(x_j, x_{j+1}) = var(-inf, x_1);
        // throws DomainError when the target variance is unreachable.
        std::vector<double> cuts{x1};
        const double target = truncated_moments_std(-kInf, x1).variance;
        for (int j = 1; j < m; ++j) {
            const double lo = cuts.back() + 1e-9;
            const double hi = -1e-8;
            const auto gap = [&](double t) {
                return truncated_moments_std(cuts.back(), t).variance - target;
            };
            if (!(lo < hi) || gap(hi) < 0.0) {
                throw DomainError("nested_bisection: band variance target unreachable");
            }
            RootOptions opt;
            opt.x_tol = 1e-13;
            cuts.push_back(find_root(gap, lo, hi, opt));
        }
        return cuts;
    };
    // Central-minus-tail variance at the chained cuts; unreachable chains
    // count as negative (the outer cut must move left).
    const auto central_gap = [&](double x1) -> double {
        try {
            const auto cuts = chain(x1);
            const double target = truncated_moments_std(-kInf, x1).variance;
            return truncated_moments_std(cuts.back(), -cuts.back()).variance - target;
        } catch (const DomainError&) {
            return -1.0;
        }
    };
    double lo = -6.5, hi = -0.05;
    if (!(central_gap(lo) > 0.0)) {
        throw ConvergenceError("nested_bisection: no sign change on the outer bracket");
    }
    for (int iter = 0; iter < 200 && hi - lo > 1e-12; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (central_gap(mid) > 0.0 ? lo : hi) = mid;
    }
    return chain(0.5 * (lo + hi));
}

EquilibriumReport assemble_symmetric_report(const std::vector<double>& cuts) {
    EquilibriumReport report;
    const size_t m = cuts.size();
    report.root_x = cuts.front();

    // Quantile splits mirrored exactly so q_i + q_{k-i} = 1 bit-for-bit.
    std::vector<double> lower(m);
    for (size_t i = 0; i < m; ++i) lower[i] = norm_cdf(cuts[i]);
    report.splits = lower;
    for (size_t i = m; i-- > 0;) report.splits.push_back(1.0 - lower[i]);

    const auto ends = cut_endpoints(cuts);
    std::vector<double> bounds{0.0};
    for (double s : report.splits) bounds.push_back(s);
    bounds.push_back(1.0);

    double vmin = kInf, vmax = -kInf;
    for (size_t j = 0; j + 1 < ends.size(); ++j) {
        const TruncatedMoments mom = truncated_moments_std(ends[j], ends[j + 1]);
        report.groups.emplace_back(QuantileInterval(bounds[j], bounds[j + 1]), mom);
        vmin = std::min(vmin, mom.variance);
        vmax = std::max(vmax, mom.variance);
    }
    report.residual = vmax - vmin;
    return report;
}

std::string format_iterate(const std::vector<double>& cuts, double residual) {
    std::ostringstream oss;
    oss.precision(17);
    oss << "best iterate (";
    for (size_t i = 0; i < cuts.size(); ++i) oss << (i ? ", " : "") << cuts[i];
    oss << "), residual " << residual;
    return oss.str();
}

} // namespace

double balance_equation_3(double x) {
    const double cdf = norm_cdf(x);
    return -x * cdf - norm_pdf(x) * (1.0 - 2.0 * cdf);
}

EquilibriumReport solve_equilibrium_3() {
    RootOptions opt;
    opt.x_tol = 1e-15;
    opt.f_tol = 1e-14;
    const double root = find_root(balance_equation_3, -3.0, -0.1, opt);
    return assemble_symmetric_report({root});
}

EquilibriumReport solve_equilibrium_k(int k) {
    if (k < 3 || k % 2 == 0) {
        throw DomainError("solve_equilibrium_k: k must be odd and >= 3");
    }
    const int m = (k - 1) / 2;

    // Equal-mass starting cuts; Newton usually converges from here.
    std::vector<double> cuts(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        cuts[static_cast<size_t>(i)] = norm_quantile(static_cast<double>(i + 1) / k);
    }
    constexpr double tol = 5e-14;
    if (!newton_refine(cuts, tol, 80)) {
        cuts = nested_bisection(m);
        if (!newton_refine(cuts, tol, 80)) {
            double residual = std::numeric_limits<double>::quiet_NaN();
            try {
                residual = variance_gaps(cuts).lpNorm<Eigen::Infinity>();
            } catch (const DomainError&) {
            }
            if (!(residual <= 1e-10)) {
                throw ConvergenceError("solve_equilibrium_k: " + format_iterate(cuts, residual));
            }
        }
    }
    EquilibriumReport report = assemble_symmetric_report(cuts);
    if (!(report.residual <= 1e-10)) {
        throw ConvergenceError("solve_equilibrium_k: " +
                               format_iterate(cuts, report.residual));
    }
    return report;
}

EquilibriumReport balance_report(const GaussianModel& model,
                                 const std::vector<double>& splits) {
    if (splits.empty()) throw DomainError("balance_report: need at least one split");
    for (size_t i = 0; i < splits.size(); ++i) {
        if (!(splits[i] > 0.0 && splits[i] < 1.0)) {
            throw DomainError("balance_report: splits must lie in (0,1)");
        }
        if (i > 0 && !(splits[i - 1] < splits[i])) {
            throw DomainError("balance_report: splits must be strictly ascending");
        }
    }
    EquilibriumReport report;
    report.splits = splits;
    report.root_x = norm_quantile(splits.front());

    std::vector<double> bounds{0.0};
    bounds.insert(bounds.end(), splits.begin(), splits.end());
    bounds.push_back(1.0);

    const double mu1 = model.mu(0);
    const double sd1 = std::sqrt(model.sigma(0, 0));
    for (size_t j = 0; j + 1 < bounds.size(); ++j) {
        const QuantileInterval interval(bounds[j], bounds[j + 1]);
        const double a = interval.q1 <= 0.0 ? -kInf : norm_quantile(interval.q1);
        const double b = interval.q2 >= 1.0 ? kInf : norm_quantile(interval.q2);
        const TruncatedMoments std_mom = truncated_moments_std(a, b);
        report.groups.emplace_back(
            interval, TruncatedMoments{mu1 + sd1 * std_mom.mean,
                                       model.sigma(0, 0) * std_mom.variance});
        report.conditional_matrices.push_back(conditional_covariance(model, interval));
    }

    double worst = 0.0;
    for (size_t i = 0; i < report.conditional_matrices.size(); ++i) {
        for (size_t j = i + 1; j < report.conditional_matrices.size(); ++j) {
            worst = std::max(worst, frobenius_distance(report.conditional_matrices[i],
                                                       report.conditional_matrices[j]));
        }
    }
    report.residual = worst;
    return report;
}

double normality_distance(const SampleBlock& sample, double q) {
    if (!(q > 0.0 && q < 0.5)) {
        throw DomainError("normality_distance: q must lie in (0, 0.5)");
    }
    const auto n = sample.count();
    const auto tail_count = static_cast<std::int64_t>(std::ceil(q * static_cast<double>(n)));
    const auto center_hi = static_cast<std::int64_t>(std::ceil((1.0 - q) * static_cast<double>(n)));
    if (tail_count < 100 || center_hi - tail_count < 100) {
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "normality_distance: needs >= 100 observations per band, got %lld and %lld",
                      static_cast<long long>(tail_count),
                      static_cast<long long>(center_hi - tail_count));
        throw InsufficientDataError(buf);
    }
    const ConditionalMatrix tail =
        empirical_conditional_matrix(sample, QuantileInterval(0.0, q), MatrixKind::covariance);
    const ConditionalMatrix center =
        empirical_conditional_matrix(sample, QuantileInterval(q, 1.0 - q), MatrixKind::covariance);
    return frobenius_distance(tail, center);
}

} // namespace eqpart
