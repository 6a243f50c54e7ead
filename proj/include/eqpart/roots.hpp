#pragma once

// Bracketed scalar root finding and 1-D minimization.  Header-only so the
// solvers can stay templated on the callable type.

#include "eqpart/errors.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace eqpart {

struct RootOptions {
    double x_tol = 1e-14;     // stop when the bracket is this narrow
    double f_tol = 0.0;       // additionally stop when |f| <= f_tol (0 = ignore)
    int max_iter = 200;
};

// Finds a root of f on [lo, hi], where f(lo) and f(hi) must have opposite
// signs (a zero endpoint is returned immediately).  Each iteration tries a
// secant step through the current bracket endpoints and falls back to
// bisection whenever the secant point leaves the bracket or fails to shrink
// it fast enough, so convergence is guaranteed and typically superlinear.
template <typename F>
double find_root(F&& f, double lo, double hi, const RootOptions& opt = {}) {
    if (!(lo < hi)) throw DomainError("find_root: empty bracket");
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) {
        throw DomainError("find_root: f has the same sign at both bracket ends");
    }
    double x = lo, fx = flo;
    int last_side = 0;   // -1 when lo moved last, +1 when hi moved last
    for (int it = 0; it < opt.max_iter; ++it) {
        // Secant proposal through the bracket endpoints; bisect when it
        // is not strictly interior.  The Illinois halving below keeps the
        // stale endpoint's weight shrinking, so the bracket width itself
        // converges instead of stagnating on convex functions.
        double cand = 0.5 * (lo + hi);
        const double denom = fhi - flo;
        if (denom != 0.0) {
            const double sec = (lo * fhi - hi * flo) / denom;
            if (sec > lo && sec < hi) cand = sec;
        }
        x = cand;
        fx = f(x);
        if (fx == 0.0) return x;
        if ((fx > 0.0) == (flo > 0.0)) {
            lo = x;
            flo = fx;
            if (last_side == -1) fhi *= 0.5;
            last_side = -1;
        } else {
            hi = x;
            fhi = fx;
            if (last_side == +1) flo *= 0.5;
            last_side = +1;
        }
        if (opt.f_tol > 0.0 && std::fabs(fx) <= opt.f_tol) return x;
        if (hi - lo <= opt.x_tol) return 0.5 * (lo + hi);
    }
    if (opt.f_tol > 0.0 && std::fabs(fx) <= opt.f_tol * 100.0) return x;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "find_root: no convergence after %d iterations; best x=%.17g, f=%.3g",
                  opt.max_iter, x, fx);
    throw ConvergenceError(buf);
}

// Golden-section minimization of a unimodal f on [lo, hi]; returns the
// abscissa of the minimum to within x_tol.
template <typename F>
double golden_minimize(F&& f, double lo, double hi, double x_tol = 1e-6) {
    if (!(lo < hi)) throw DomainError("golden_minimize: empty interval");
    constexpr double invphi = 0.61803398874989484820;   // (sqrt(5)-1)/2
    double a = lo, b = hi;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > x_tol) {
        if (fc <= fd) {
            b = d; d = c; fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

} // namespace eqpart
