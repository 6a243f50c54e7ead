#include "eqpart/quadrature.hpp"
#include "eqpart/errors.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace eqpart {

namespace {

// Nodes of the n-point rule on [-1,1] are the roots of the Legendre
// polynomial P_n; weights are 2/((1-x^2) P_n'(x)^2).  The Tricomi-style
// cosine initial guess converges in 3-4 Newton steps.
QuadratureRule build_rule(int n) {
    QuadratureRule rule;
    rule.nodes.resize(static_cast<size_t>(n));
    rule.weights.resize(static_cast<size_t>(n));
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            // Evaluate P_n(x) and P_n'(x) by the three-term recurrence.
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map from [-1,1] to [0,1]: node (x+1)/2, weight w/2.  The cosine
        // guess starts near +1, so index i is the (i+1)-th largest root.
        rule.nodes[static_cast<size_t>(n - 1 - i)] = 0.5 * (x + 1.0);
        rule.weights[static_cast<size_t>(n - 1 - i)] = 0.5 * w;
        rule.nodes[static_cast<size_t>(i)] = 0.5 * (1.0 - x);
        rule.weights[static_cast<size_t>(i)] = 0.5 * w;
    }
    return rule;
}

} // namespace

const QuadratureRule& gauss_legendre_01(int n) {
    if (n < 1 || n > 4096) throw DomainError("gauss_legendre_01: order out of range");
    static std::map<int, QuadratureRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) {
        it = cache.emplace(n, build_rule(n)).first;
    }
    return it->second;
}

} // namespace eqpart
