#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eqpart/errors.hpp"
#include "eqpart/quadrature.hpp"
#include "eqpart/roots.hpp"

#include <cmath>
#include <numbers>

using namespace eqpart;

TEST_CASE("root finding on smooth brackets") {
    const double s2 = find_root([](double x) { return x * x - 2.0; }, 0.0, 2.0);
    CHECK(std::abs(s2 - std::numbers::sqrt2) < 1e-14);

    const double half_pi = find_root([](double x) { return std::cos(x); }, 0.0, 2.0);
    CHECK(std::abs(half_pi - 0.5 * std::numbers::pi) < 1e-14);

    // Decreasing function: same machinery, opposite sign arrangement.
    const double ln2 = find_root([](double x) { return 2.0 - std::exp(x); }, 0.0, 3.0);
    CHECK(std::abs(ln2 - std::numbers::ln2) < 1e-14);
}

TEST_CASE("root finding honors f_tol and endpoint zeros") {
    RootOptions loose;
    loose.f_tol = 1e-6;
    const double x = find_root([](double t) { return t * t * t - 8.0; }, 0.0, 5.0, loose);
    CHECK(std::abs(x * x * x - 8.0) <= 1e-6 * 100.0);

    // Exact zero at an endpoint is returned immediately.
    CHECK(find_root([](double t) { return t; }, 0.0, 1.0) == 0.0);
    CHECK(find_root([](double t) { return t - 1.0; }, 0.0, 1.0) == 1.0);
}

TEST_CASE("root finding rejects bad brackets and reports stalls") {
    CHECK_THROWS_AS(find_root([](double t) { return t * t + 1.0; }, -1.0, 1.0), DomainError);
    CHECK_THROWS_AS(find_root([](double) { return 1.0; }, 1.0, 1.0), DomainError);

    RootOptions strangled;
    strangled.max_iter = 3;
    strangled.x_tol = 1e-300;
    try {
        find_root([](double t) { return std::atan(t - 0.123456); }, -10.0, 10.0, strangled);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        // The message carries the best iterate so callers can inspect it.
        CHECK(std::string(e.what()).find("best x=") != std::string::npos);
    }
}

TEST_CASE("root finding beats plain bisection on its iteration budget") {
    // A well-behaved function should converge to 1e-14 in far fewer than
    // the ~47 halvings plain bisection would need on a width-2 bracket.
    int calls = 0;
    const double root = find_root(
        [&](double x) {
            ++calls;
            return std::tanh(x) - 0.5;
        },
        -1.0, 1.0);
    CHECK(std::abs(root - std::atanh(0.5)) < 1e-14);
    CHECK(calls < 40);
}

TEST_CASE("golden-section minimization") {
    const double a = golden_minimize([](double x) { return (x - 0.3) * (x - 0.3); }, 0.0, 1.0);
    CHECK(std::abs(a - 0.3) < 1e-6);

    // A smooth minimum can only be located to ~sqrt(eps) absolute because
    // f moves quadratically below the resolution of its own values.
    const double b = golden_minimize([](double x) { return std::cos(x); }, 2.0, 4.0, 1e-9);
    CHECK(std::abs(b - std::numbers::pi) < 5e-8);

    // A kinked minimum has no such floor: the bracket tolerance is the
    // only limit.
    const double c = golden_minimize([](double x) { return std::abs(x - std::numbers::pi); },
                                     2.0, 4.0, 1e-9);
    CHECK(std::abs(c - std::numbers::pi) < 1e-9);

    CHECK_THROWS_AS(golden_minimize([](double x) { return x; }, 1.0, 1.0), DomainError);
}

TEST_CASE("quadrature nodes are ordered, symmetric, and normalized") {
    for (int n : {1, 2, 5, 16, 64, 128, 257}) {
        const auto& rule = gauss_legendre_01(n);
        REQUIRE(rule.nodes.size() == static_cast<size_t>(n));
        REQUIRE(rule.weights.size() == static_cast<size_t>(n));
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            CHECK(rule.nodes[i] > 0.0);
            CHECK(rule.nodes[i] < 1.0);
            if (i) CHECK(rule.nodes[i] > rule.nodes[i - 1]);
            CHECK(rule.weights[i] > 0.0);
            // Nodes mirror around 1/2 with equal weights.
            CHECK(std::abs(rule.nodes[i] + rule.nodes[n - 1 - i] - 1.0) < 1e-15);
            CHECK(std::abs(rule.weights[i] - rule.weights[n - 1 - i]) < 1e-15);
            total += rule.weights[i];
        }
        CHECK(std::abs(total - 1.0) < 1e-14);
    }
    CHECK_THROWS_AS(gauss_legendre_01(0), DomainError);
    CHECK_THROWS_AS(gauss_legendre_01(-3), DomainError);
    CHECK_THROWS_AS(gauss_legendre_01(5000), DomainError);
}

TEST_CASE("quadrature integrates polynomials of degree 2n-1 exactly") {
    for (int n : {2, 4, 8}) {
        const auto& rule = gauss_legendre_01(n);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double sum = 0.0;
            for (size_t i = 0; i < rule.nodes.size(); ++i) {
                sum += rule.weights[i] * std::pow(rule.nodes[i], k);
            }
            CHECK(std::abs(sum - 1.0 / (k + 1)) < 1e-14);
        }
    }
}

TEST_CASE("quadrature reaches machine precision on analytic integrands") {
    const auto& rule = gauss_legendre_01(24);
    double e_sum = 0.0, cos_sum = 0.0;
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
        e_sum += rule.weights[i] * std::exp(rule.nodes[i]);
        cos_sum += rule.weights[i] * std::cos(rule.nodes[i]);
    }
    CHECK(std::abs(e_sum - (std::numbers::e - 1.0)) < 1e-14);
    CHECK(std::abs(cos_sum - std::sin(1.0)) < 1e-14);
}

TEST_CASE("quadrature rules are cached") {
    const auto& a = gauss_legendre_01(96);
    const auto& b = gauss_legendre_01(96);
    CHECK(&a == &b);
}
