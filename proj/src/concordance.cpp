#include "eqpart/concordance.hpp"

#include "eqpart/elliptic_mc.hpp"
#include "eqpart/gaussian.hpp"
#include "eqpart/quadrature.hpp"
#include "eqpart/roots.hpp"
#include "eqpart/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

namespace eqpart {

namespace {

void validate_band(double r, double p, double q) {
    if (!(std::fabs(r) < 1.0)) {
        throw DomainError("conditional copula: correlation must lie in (-1,1)");
    }
    if (!(p >= 0.0 && p < q && q <= 1.0)) {
        throw DomainError("conditional copula: need 0 <= p < q <= 1");
    }
}

// Gaussian copula C(u,v) = Phi2(Phi^{-1}(u), Phi^{-1}(v); r) with exact
// boundary values.
double gauss_copula(double u, double v, double r) {
    if (u <= 0.0 || v <= 0.0) return 0.0;
    if (u >= 1.0) return v;
    if (v >= 1.0) return u;
    return bvn_cdf(norm_quantile(u), norm_quantile(v), r);
}

// Conditional margin G(w) = (C(q,w) - C(p,w)) / (q-p): the distribution of
// the second coordinate's grade given the first falls in the band.
double conditional_margin(double w, double r, double p, double q) {
    return (gauss_copula(q, w, r) - gauss_copula(p, w, r)) / (q - p);
}

// Inverse of the conditional margin.  G is continuous and strictly
// increasing from 0 to 1, so [0,1] always brackets; solved essentially to
// machine precision so copula evaluations stay accurate well below 1e-9.
double invert_margin(double v, double r, double p, double q) {
    if (v <= 0.0) return 0.0;
    if (v >= 1.0) return 1.0;
    RootOptions opt;
    opt.x_tol = 1e-15;
    opt.max_iter = 300;
    return find_root([&](double w) { return conditional_margin(w, r, p, q) - v; },
                     0.0, 1.0, opt);
}

// Conditional copula with the margin already inverted (w = G^{-1}(v)).
double cond_copula_at(double u, double w, double r, double p, double q) {
    if (u <= 0.0) return 0.0;
    const double uu = std::min((q - p) * u + p, q);
    return (gauss_copula(uu, w, r) - gauss_copula(p, w, r)) / (q - p);
}

// Spearman integrand summed over a tensor Gauss-Legendre grid; one margin
// inversion per v-node is shared across the whole u-row.
double spearman_estimate(int order, double r, double p, double q) {
    const QuadratureRule& rule = gauss_legendre_01(order);
    double integral = 0.0;
    for (int j = 0; j < order; ++j) {
        const double w = invert_margin(rule.nodes[static_cast<size_t>(j)], r, p, q);
        double row = 0.0;
        for (int i = 0; i < order; ++i) {
            row += rule.weights[static_cast<size_t>(i)] *
                   cond_copula_at(rule.nodes[static_cast<size_t>(i)], w, r, p, q);
        }
        integral += rule.weights[static_cast<size_t>(j)] * row;
    }
    return -3.0 + 12.0 * integral;
}

// Kendall via tau = 1 - 4 * int int dC/du * dC/dv du dv.  Both partial
// derivatives of the band copula are conditional normal cdfs, so unlike the
// copula density the integrand is bounded.  Mapping both grades back to the
// normal scale (x the banded coordinate, y the free one) removes the margin
// inversion and leaves a smooth integrand with Gaussian decay:
//   tau = 1 - (4 / (q-p)^2) * int int Phi((y-rx)/s) *
//             [Phi((x-ry)/s) - Phi((zp-ry)/s)] phi(x) phi(y) dx dy
// over x in (zp, zq), y in R, with s = sqrt(1-r^2).  The infinite limits are
// cut at +-8.5 where the normal density is below 3e-17.
double kendall_estimate(int order, double r, double p, double q) {
    const QuadratureRule& rule = gauss_legendre_01(order);
    const double s = std::sqrt((1.0 - r) * (1.0 + r));
    const double width = q - p;
    constexpr double kCut = 8.5;
    const double xlo = p > 0.0 ? norm_quantile(p) : -kCut;
    const double xhi = q < 1.0 ? norm_quantile(q) : kCut;

    std::vector<double> xs(static_cast<size_t>(order)), fx(static_cast<size_t>(order));
    for (int i = 0; i < order; ++i) {
        const double x = xlo + (xhi - xlo) * rule.nodes[static_cast<size_t>(i)];
        xs[static_cast<size_t>(i)] = x;
        fx[static_cast<size_t>(i)] =
            rule.weights[static_cast<size_t>(i)] * (xhi - xlo) * norm_pdf(x);
    }

    double integral = 0.0;
    for (int j = 0; j < order; ++j) {
        const double y = -kCut + 2.0 * kCut * rule.nodes[static_cast<size_t>(j)];
        const double wy = rule.weights[static_cast<size_t>(j)] * 2.0 * kCut * norm_pdf(y);
        const double lower = p > 0.0 ? norm_cdf((xlo - r * y) / s) : 0.0;
        double row = 0.0;
        for (int i = 0; i < order; ++i) {
            const double x = xs[static_cast<size_t>(i)];
            const double below = norm_cdf((y - r * x) / s);
            const double left = norm_cdf((x - r * y) / s);
            row += fx[static_cast<size_t>(i)] * below * (left - lower);
        }
        integral += wy * row;
    }
    return 1.0 - 4.0 * integral / (width * width);
}

// Doubles the quadrature order until two successive estimates agree.
template <typename Estimator>
double doubled_quadrature(Estimator&& estimate, int first_order, int max_order,
                          double tol, const char* what) {
    double prev = estimate(first_order);
    for (int order = 2 * first_order; order <= max_order; order *= 2) {
        const double next = estimate(order);
        if (std::fabs(next - prev) < tol) return next;
        prev = next;
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s: quadrature not converged to %g at order %d", what,
                  tol, max_order);
    throw ConvergenceError(buf);
}

// Conditioned bivariate draws: the first grade is uniform on (p,q) so no
// rejection is needed, the second coordinate follows the regression form.
Eigen::MatrixXd conditioned_draws(double r, double p, double q, std::int64_t count,
                                  std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd draws(2, count);
    const double slope = r;
    const double noise = std::sqrt((1.0 - r) * (1.0 + r));
    for (std::int64_t i = 0; i < count; ++i) {
        const double u = p + (q - p) * rng.uniform();
        const double x1 = norm_quantile(u);
        draws(0, i) = x1;
        draws(1, i) = slope * x1 + noise * rng.normal();
    }
    return draws;
}

// Batch-means Monte Carlo wrapper around an empirical concordance matrix:
// the full-sample estimate is reported with the spread of 20 batch
// estimates as its standard error.
McEstimate batched_concordance(double r, double p, double q, std::int64_t count,
                               std::uint64_t seed, MatrixKind kind) {
    validate_band(r, p, q);
    if (count < 1000) {
        throw DomainError("conditioned Monte Carlo needs at least 1000 draws");
    }
    SampleBlock block;
    block.data = conditioned_draws(r, p, q, count, seed);
    block.seed = seed;
    block.generator_id = kGeneratorId;
    block.model_desc = "conditioned bivariate normal";
    const QuantileInterval whole(0.0, 1.0);

    const auto estimate = [&](const Eigen::MatrixXd& data) {
        SampleBlock view;
        view.data = data;
        return empirical_conditional_matrix(view, whole, kind).matrix(0, 1);
    };

    McEstimate out;
    out.count = count;
    out.value = estimate(block.data);

    constexpr int kBatches = 20;
    const std::int64_t batch = count / kBatches;
    std::vector<double> values;
    if (batch >= 50) {
        for (int b = 0; b < kBatches; ++b) {
            values.push_back(estimate(block.data.middleCols(b * batch, batch)));
        }
        double mean = 0.0;
        for (double x : values) mean += x;
        mean /= values.size();
        double ss = 0.0;
        for (double x : values) ss += (x - mean) * (x - mean);
        const double batch_sd = std::sqrt(ss / (values.size() - 1));
        out.std_error = batch_sd / std::sqrt(static_cast<double>(kBatches));
    }
    return out;
}

} // namespace

double conditional_copula_eval(const ConditionalCopula& cop, double u, double v) {
    validate_band(cop.r, cop.p, cop.q);
    if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0)) {
        throw DomainError("conditional_copula_eval: (u,v) must lie in the unit square");
    }
    if (u <= 0.0 || v <= 0.0) return 0.0;
    if (v >= 1.0) return u;
    if (u >= 1.0) return v;
    const double w = invert_margin(v, cop.r, cop.p, cop.q);
    return cond_copula_at(u, w, cop.r, cop.p, cop.q);
}

double conditional_spearman(double r, double p, double q, ConcordanceMethod method) {
    validate_band(r, p, q);
    if (method == ConcordanceMethod::monte_carlo) {
        return conditional_spearman_mc(r, p, q, kDefaultMcCount, kDefaultMcSeed).value;
    }
    if (r == 0.0) return 0.0;
    return doubled_quadrature(
        [&](int order) { return spearman_estimate(order, r, p, q); }, 64, 512, 1e-7,
        "conditional_spearman");
}

McEstimate conditional_spearman_mc(double r, double p, double q, std::int64_t count,
                                   std::uint64_t seed) {
    return batched_concordance(r, p, q, count, seed, MatrixKind::spearman);
}

double conditional_kendall(double r, double p, double q, ConcordanceMethod method) {
    validate_band(r, p, q);
    if (method == ConcordanceMethod::monte_carlo) {
        return conditional_kendall_mc(r, p, q, kDefaultMcCount, kDefaultMcSeed).value;
    }
    if (r == 0.0) return 0.0;
    return doubled_quadrature(
        [&](int order) { return kendall_estimate(order, r, p, q); }, 64, 512, 1e-7,
        "conditional_kendall");
}

McEstimate conditional_kendall_mc(double r, double p, double q, std::int64_t count,
                                  std::uint64_t seed) {
    return batched_concordance(r, p, q, count, seed, MatrixKind::kendall);
}

double taylor_slope_rho(double p, double q) {
    if (!(p >= 0.0 && p < q && q <= 1.0)) {
        throw DomainError("taylor_slope_rho: need 0 <= p < q <= 1");
    }
    const double x1 = p <= 0.0 ? -std::numeric_limits<double>::infinity() : norm_quantile(p);
    const double x2 = q >= 1.0 ? std::numeric_limits<double>::infinity() : norm_quantile(q);
    const double width = q - p;
    const double bracket = norm_cdf(kSqrt2 * x2) - norm_cdf(kSqrt2 * x1) -
                           width * kSqrtPi * (norm_pdf(x1) + norm_pdf(x2));
    return 3.0 / (width * width * M_PI) * bracket;
}

ConcordanceCurvePoint delta_curves(double q, double r) {
    if (!(q > 0.0 && q < 0.5)) {
        throw DomainError("delta_curves: q must lie in (0, 0.5)");
    }
    if (!(std::fabs(r) < 1.0)) {
        throw DomainError("delta_curves: correlation must lie in (-1,1)");
    }
    ConcordanceCurvePoint point;
    point.q = q;
    point.r = r;
    if (r == 0.0) return point;   // product copula in every band
    point.delta_rho = conditional_spearman(r, 0.0, q, ConcordanceMethod::quadrature) -
                      conditional_spearman(r, q, 1.0 - q, ConcordanceMethod::quadrature);
    point.delta_tau = conditional_kendall(r, 0.0, q, ConcordanceMethod::quadrature) -
                      conditional_kendall(r, q, 1.0 - q, ConcordanceMethod::quadrature);
    return point;
}

double equilibrium_curve_A(double r, MatrixKind kappa, std::vector<double>* all_roots) {
    if (kappa != MatrixKind::spearman && kappa != MatrixKind::kendall) {
        throw DomainError("equilibrium_curve_A: kappa must be spearman or kendall");
    }
    if (!(std::fabs(r) < 1.0)) {
        throw DomainError("equilibrium_curve_A: correlation must lie in (-1,1)");
    }
    if (r == 0.0) {
        const double qstar = solve_qstar();
        if (all_roots) *all_roots = {qstar};
        return qstar;
    }
    const auto delta = [&](double q) {
        return kappa == MatrixKind::spearman
                   ? conditional_spearman(r, 0.0, q, ConcordanceMethod::quadrature) -
                         conditional_spearman(r, q, 1.0 - q, ConcordanceMethod::quadrature)
                   : conditional_kendall(r, 0.0, q, ConcordanceMethod::quadrature) -
                         conditional_kendall(r, q, 1.0 - q, ConcordanceMethod::quadrature);
    };

    // Bracket every sign change at scan resolution, then polish each.
    constexpr double kScanLo = 0.05, kScanHi = 0.45, kScanStep = 0.05;
    std::vector<double> roots;
    double prev_q = kScanLo;
    double prev_d = delta(prev_q);
    RootOptions opt;
    opt.x_tol = 1e-9;
    opt.f_tol = 1e-6;
    for (double qq = kScanLo + kScanStep; qq <= kScanHi + 1e-12; qq += kScanStep) {
        const double d = delta(qq);
        if (prev_d == 0.0) {
            roots.push_back(prev_q);
        } else if ((prev_d < 0.0) != (d < 0.0)) {
            roots.push_back(find_root(delta, prev_q, qq, opt));
        }
        prev_q = qq;
        prev_d = d;
    }
    if (roots.empty()) {
        throw ConvergenceError("equilibrium_curve_A: no sign change on [0.05, 0.45]");
    }
    if (all_roots) *all_roots = roots;
    return roots.front();
}

double solve_qstar() {
    const auto lhs = [](double q) {
        const double x = norm_quantile(q);
        return (1.0 - 4.0 * q + 6.0 * q * q) * norm_cdf(kSqrt2 * x) -
               q * (1.0 - 6.0 * q + 8.0 * q * q) * kSqrtPi * norm_pdf(x) - q * q;
    };
    RootOptions opt;
    opt.x_tol = 1e-12;
    return find_root(lhs, 0.05, 0.45, opt);
}

} // namespace eqpart
