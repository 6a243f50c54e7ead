#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eqpart/concordance.hpp"
#include "eqpart/errors.hpp"
#include "eqpart/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace eqpart;

namespace {

// Exact full-band values for the Gaussian pair: rho = (6/pi) asin(r/2),
// tau = (2/pi) asin(r).
double exact_rho(double r) { return 6.0 / std::numbers::pi * std::asin(0.5 * r); }
double exact_tau(double r) { return 2.0 / std::numbers::pi * std::asin(r); }

} // namespace

TEST_CASE("band copula: boundary behavior and axioms on a grid") {
    for (const ConditionalCopula cop : {ConditionalCopula{0.6, 0.0, 0.198},
                                        ConditionalCopula{-0.45, 0.198, 0.802},
                                        ConditionalCopula{0.9, 0.0, 1.0}}) {
        // Exact boundary shortcuts.
        CHECK(conditional_copula_eval(cop, 0.0, 0.37) == 0.0);
        CHECK(conditional_copula_eval(cop, 0.37, 0.0) == 0.0);
        CHECK(conditional_copula_eval(cop, 1.0, 0.37) == 0.37);
        CHECK(conditional_copula_eval(cop, 0.37, 1.0) == 0.37);

        // Uniform margins and Frechet bounds on a 21 x 21 grid.
        for (int i = 0; i <= 20; ++i) {
            const double u = i / 20.0;
            CHECK(std::abs(conditional_copula_eval(cop, u, 1.0) - u) < 1e-9);
            CHECK(std::abs(conditional_copula_eval(cop, 1.0, u) - u) < 1e-9);
            for (int j = 0; j <= 20; ++j) {
                const double v = j / 20.0;
                const double c = conditional_copula_eval(cop, u, v);
                CHECK(c >= std::max(0.0, u + v - 1.0) - 1e-9);
                CHECK(c <= std::min(u, v) + 1e-9);
            }
        }

        // 2-increasing: every grid rectangle has nonnegative mass.
        for (int i = 0; i < 10; ++i) {
            for (int j = 0; j < 10; ++j) {
                const double u1 = i / 10.0, u2 = (i + 1) / 10.0;
                const double v1 = j / 10.0, v2 = (j + 1) / 10.0;
                const double mass = conditional_copula_eval(cop, u2, v2) -
                                    conditional_copula_eval(cop, u1, v2) -
                                    conditional_copula_eval(cop, u2, v1) +
                                    conditional_copula_eval(cop, u1, v1);
                CHECK(mass >= -1e-9);
            }
        }
    }
}

TEST_CASE("band copula: independence and full-band reductions") {
    // r = 0: conditioning an independent pair changes nothing.
    const ConditionalCopula indep{0.0, 0.1, 0.4};
    for (double u : {0.2, 0.5, 0.9}) {
        for (double v : {0.1, 0.6, 0.8}) {
            CHECK(std::abs(conditional_copula_eval(indep, u, v) - u * v) < 1e-12);
        }
    }
    // Full band: the plain Gaussian copula.
    const ConditionalCopula full{0.7, 0.0, 1.0};
    for (double u : {0.05, 0.3, 0.65, 0.95}) {
        for (double v : {0.15, 0.5, 0.85}) {
            const double direct = bvn_cdf(norm_quantile(u), norm_quantile(v), 0.7);
            CHECK(std::abs(conditional_copula_eval(full, u, v) - direct) < 1e-10);
        }
    }
}

TEST_CASE("band copula: joint reflection maps to the survival copula") {
    // (X1, X2) -> (-X1, -X2) turns the band (p,q) into (1-q, 1-p) and the
    // copula into its survival transform.
    const ConditionalCopula lower{0.55, 0.0, 0.198};
    const ConditionalCopula upper{0.55, 0.802, 1.0};
    for (double u : {0.1, 0.35, 0.6, 0.9}) {
        for (double v : {0.2, 0.5, 0.75}) {
            const double survival =
                u + v - 1.0 + conditional_copula_eval(lower, 1.0 - u, 1.0 - v);
            CHECK(std::abs(conditional_copula_eval(upper, u, v) - survival) < 1e-9);
        }
    }
}

TEST_CASE("band copula: input validation") {
    CHECK_THROWS_AS(conditional_copula_eval({1.0, 0.0, 0.5}, 0.5, 0.5), DomainError);
    CHECK_THROWS_AS(conditional_copula_eval({-1.0, 0.0, 0.5}, 0.5, 0.5), DomainError);
    CHECK_THROWS_AS(conditional_copula_eval({0.5, 0.4, 0.4}, 0.5, 0.5), DomainError);
    CHECK_THROWS_AS(conditional_copula_eval({0.5, -0.1, 0.4}, 0.5, 0.5), DomainError);
    CHECK_THROWS_AS(conditional_copula_eval({0.5, 0.0, 1.1}, 0.5, 0.5), DomainError);
    CHECK_THROWS_AS(conditional_copula_eval({0.5, 0.0, 0.5}, -0.1, 0.5), DomainError);
    CHECK_THROWS_AS(conditional_copula_eval({0.5, 0.0, 0.5}, 0.5, 1.0001), DomainError);
}

TEST_CASE("full-band concordances against closed forms") {
    for (double r : {-0.8, -0.3, 0.25, 0.5, 0.9}) {
        CHECK(std::abs(conditional_spearman(r, 0.0, 1.0, ConcordanceMethod::quadrature) -
                       exact_rho(r)) < 2e-6);
        CHECK(std::abs(conditional_kendall(r, 0.0, 1.0, ConcordanceMethod::quadrature) -
                       exact_tau(r)) < 2e-6);
    }
    CHECK(conditional_spearman(0.0, 0.1, 0.9, ConcordanceMethod::quadrature) == 0.0);
    CHECK(conditional_kendall(0.0, 0.1, 0.9, ConcordanceMethod::quadrature) == 0.0);
}

TEST_CASE("band concordances: pinned value and reflection invariance") {
    // tau over the lower-fifth band at r = 0.5, pinned against an offline
    // adaptive-quadrature oracle (nested 1-D integration, tol 1e-12, itself
    // validated to 1e-15 against the full-band closed form).
    const double tau = conditional_kendall(0.5, 0.0, 0.2, ConcordanceMethod::quadrature);
    CHECK(std::abs(tau - 0.15854090626532324) < 5e-7);

    // Concordance is invariant under the joint reflection of both
    // coordinates, which maps the lower tail band to the upper one.
    const double rho_lo = conditional_spearman(0.6, 0.0, 0.198, ConcordanceMethod::quadrature);
    const double rho_hi = conditional_spearman(0.6, 0.802, 1.0, ConcordanceMethod::quadrature);
    CHECK(std::abs(rho_lo - rho_hi) < 1e-6);
    const double tau_lo = conditional_kendall(0.6, 0.0, 0.198, ConcordanceMethod::quadrature);
    const double tau_hi = conditional_kendall(0.6, 0.802, 1.0, ConcordanceMethod::quadrature);
    CHECK(std::abs(tau_lo - tau_hi) < 1e-6);

    // Odd in r.
    CHECK(std::abs(rho_lo + conditional_spearman(-0.6, 0.0, 0.198,
                                                 ConcordanceMethod::quadrature)) < 1e-9);

    // Conditioning a band weakens rank dependence relative to the whole.
    CHECK(rho_lo < exact_rho(0.6));
    CHECK(tau_lo < exact_tau(0.6));
}

TEST_CASE("Monte Carlo concordances agree with quadrature within error bars") {
    const double r = 0.5, p = 0.0, q = 0.198;
    const double rho_quad = conditional_spearman(r, p, q, ConcordanceMethod::quadrature);
    const auto rho_mc = conditional_spearman_mc(r, p, q, 200000, 13579);
    CHECK(rho_mc.count == 200000);
    CHECK(rho_mc.std_error > 0.0);
    CHECK(rho_mc.std_error < 0.05);
    CHECK(std::abs(rho_mc.value - rho_quad) < 5.0 * rho_mc.std_error);

    const double tau_quad = conditional_kendall(r, p, q, ConcordanceMethod::quadrature);
    const auto tau_mc = conditional_kendall_mc(r, p, q, 100000, 2468);
    CHECK(std::abs(tau_mc.value - tau_quad) < 5.0 * tau_mc.std_error);

    // Reproducible by seed.
    const auto again = conditional_spearman_mc(r, p, q, 200000, 13579);
    CHECK(again.value == rho_mc.value);
    CHECK(again.std_error == rho_mc.std_error);

    CHECK_THROWS_AS(conditional_spearman_mc(r, p, q, 100, 1), DomainError);
}

TEST_CASE("small-correlation expansion: linear coefficient and tau/rho ratio") {
    // rho(r) = slope * r + O(r^3), with the slope given in closed form.
    CHECK(std::abs(taylor_slope_rho(0.0, 1.0) - 3.0 / std::numbers::pi) < 1e-15);

    struct Cell { double p, q; };
    for (const Cell cell : {Cell{0.0, 1.0}, Cell{0.0, 0.198}, Cell{0.198, 0.802},
                            Cell{0.25, 0.75}}) {
        const double slope = taylor_slope_rho(cell.p, cell.q);
        for (double r : {0.01, -0.01, 0.05}) {
            const double rho =
                conditional_spearman(r, cell.p, cell.q, ConcordanceMethod::quadrature);
            CHECK(std::abs(rho - slope * r) <= 10.0 * std::abs(r * r * r) + 2e-7);
        }
        // tau approaches (2/3) rho as r -> 0.
        const double rho = conditional_spearman(0.01, cell.p, cell.q,
                                                ConcordanceMethod::quadrature);
        const double tau = conditional_kendall(0.01, cell.p, cell.q,
                                               ConcordanceMethod::quadrature);
        CHECK(std::abs(tau / rho - 2.0 / 3.0) < 0.05);
    }
}

TEST_CASE("limit split constant and its defining equation") {
    const double qstar = solve_qstar();
    CHECK(std::abs(qstar - 0.21324130423708054606) < 1e-10);

    // Verify directly on the defining equation.
    const auto lhs = [](double q) {
        const double x = norm_quantile(q);
        return (1.0 - 4.0 * q + 6.0 * q * q) * norm_cdf(std::numbers::sqrt2 * x) -
               q * (1.0 - 6.0 * q + 8.0 * q * q) * kSqrtPi * norm_pdf(x) - q * q;
    };
    CHECK(std::abs(lhs(qstar)) < 1e-12);

    // Independent bisection of the same equation.
    double lo = 0.05, hi = 0.45;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        ((lhs(mid) < 0.0) == (lhs(lo) < 0.0) ? lo : hi) = mid;
    }
    CHECK(std::abs(qstar - 0.5 * (lo + hi)) < 1e-10);

    // At the limit split, the linear coefficients of the tail and center
    // bands coincide: that is exactly what defines it.
    const double slope_tail = taylor_slope_rho(0.0, qstar);
    const double slope_center = taylor_slope_rho(qstar, 1.0 - qstar);
    CHECK(std::abs(slope_tail - slope_center) < 1e-9);
}

TEST_CASE("tail-center concordance gap curves") {
    const ConcordanceCurvePoint at_zero = delta_curves(0.25, 0.0);
    CHECK(at_zero.delta_rho == 0.0);
    CHECK(at_zero.delta_tau == 0.0);

    // Near r = 0 the gap vanishes at the limit split.
    const double qstar = solve_qstar();
    const ConcordanceCurvePoint near_zero = delta_curves(qstar, 0.001);
    CHECK(std::abs(near_zero.delta_rho) < 1e-6);
    CHECK(std::abs(near_zero.delta_tau) < 1e-6);

    // Away from the balancing split the gap has a definite sign: at small
    // q the tail band is tiny and concentrated, weakening its dependence.
    const ConcordanceCurvePoint low = delta_curves(0.05, 0.5);
    const ConcordanceCurvePoint high = delta_curves(0.45, 0.5);
    CHECK(low.delta_rho < 0.0);
    CHECK(high.delta_rho > 0.0);

    CHECK_THROWS_AS(delta_curves(0.0, 0.5), DomainError);
    CHECK_THROWS_AS(delta_curves(0.5, 0.5), DomainError);
    CHECK_THROWS_AS(delta_curves(0.2, 1.0), DomainError);
}

TEST_CASE("balancing split as a function of correlation") {
    // r = 0 reduces to the limit constant.
    CHECK(std::abs(equilibrium_curve_A(0.0, MatrixKind::spearman) -
                   0.21324130423708054606) < 1e-10);
    CHECK(std::abs(equilibrium_curve_A(0.0, MatrixKind::kendall) -
                   0.21324130423708054606) < 1e-10);

    // Offline oracles: converged fixed-order quadrature for the rank
    // correlation, adaptive quadrature plus Brent root-finding for the
    // concordance variant.
    CHECK(std::abs(equilibrium_curve_A(0.5, MatrixKind::spearman) - 0.21549) < 2e-4);
    CHECK(std::abs(equilibrium_curve_A(0.9, MatrixKind::spearman) - 0.2311786103) < 1e-4);
    CHECK(std::abs(equilibrium_curve_A(0.9, MatrixKind::kendall) - 0.22736115954) < 5e-5);

    // Even symmetry in r.
    CHECK(std::abs(equilibrium_curve_A(0.5, MatrixKind::spearman) -
                   equilibrium_curve_A(-0.5, MatrixKind::spearman)) < 1e-9);

    // The root collector returns every crossing found by the scan.
    std::vector<double> roots;
    const double a = equilibrium_curve_A(0.5, MatrixKind::spearman, &roots);
    REQUIRE(!roots.empty());
    CHECK(a == roots.front());
    for (size_t i = 1; i < roots.size(); ++i) CHECK(roots[i] > roots[i - 1]);

    CHECK_THROWS_AS(equilibrium_curve_A(1.0, MatrixKind::spearman), DomainError);
    CHECK_THROWS_AS(equilibrium_curve_A(0.5, MatrixKind::covariance), DomainError);
}
