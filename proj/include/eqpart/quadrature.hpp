#pragma once

// Gauss-Legendre rules of arbitrary order, cached per order.

#include <utility>
#include <vector>

namespace eqpart {

struct QuadratureRule {
    std::vector<double> nodes;     // ascending
    std::vector<double> weights;   // matching, all positive
};

// n-point Gauss-Legendre rule on [0, 1].  Nodes are computed by Newton
// iteration on the Legendre polynomial (accurate to ~2 ulp) and cached, so
// repeated lookups are cheap and thread-safe.
const QuadratureRule& gauss_legendre_01(int n);

} // namespace eqpart
