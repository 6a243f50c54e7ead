#include "eqpart/gaussian.hpp"
#include "eqpart/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eqpart {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440084436210484904;  // 1/sqrt(2)

// Gauss-Legendre abscissas/weights on [-1,1] (positive half; rules are
// symmetric).  These are the classical 6/12/20-point rules used by the
// Drezner-Wesolowsky reduction of the bivariate normal integral.
constexpr double kGl6X[3] = {0.9324695142031522, 0.6612093864662647, 0.2386191860831970};
constexpr double kGl6W[3] = {0.1713244923791705, 0.3607615730481384, 0.4679139345726904};

constexpr double kGl12X[6] = {0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
                              0.5873179542866171, 0.3678314989981802, 0.1252334085114692};
constexpr double kGl12W[6] = {0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
                              0.2031674267230659,  0.2334925365383547, 0.2491470458134029};

constexpr double kGl20X[10] = {0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
                               0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
                               0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
                               0.07652652113349733};
constexpr double kGl20W[10] = {0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
                               0.08327674157670475, 0.1019301198172404,  0.1181945319615184,
                               0.1316886384491766,  0.1420961093183821,  0.1491729864726037,
                               0.1527533871307259};

// Upper-orthant probability P(X > h, Y > k) for standard bivariate normal
// with correlation r, |r| < 1.  Port of Alan Genz's BVND (the MATLAB bvnu),
// which refines Drezner & Wesolowsky (1990).  The moderate-correlation
// branch integrates exp((s*hk - (h^2+k^2)/2)/(1-s^2)) over s = sin(theta);
// the near-singular branch integrates the complementary expansion in
// sqrt(1-r^2) and assembles the result from the closed-form pieces.
double bvn_upper(double h, double k, double r) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (std::isinf(h) || std::isinf(k)) {
        if (h == inf || k == inf) return 0.0;       // either lower limit at +inf
        if (h == -inf && k == -inf) return 1.0;
        return h == -inf ? norm_cdf(-k) : norm_cdf(-h);
    }
    if (r == 0.0) return norm_cdf(-h) * norm_cdf(-k);

    const double* gx;
    const double* gw;
    int half;
    const double ar = std::fabs(r);
    if (ar < 0.3)       { gx = kGl6X;  gw = kGl6W;  half = 3; }
    else if (ar < 0.75) { gx = kGl12X; gw = kGl12W; half = 6; }
    else                { gx = kGl20X; gw = kGl20W; half = 10; }

    double hk = h * k;
    double bvn = 0.0;

    if (ar < 0.925) {
        const double hs = 0.5 * (h * h + k * k);
        const double asr = 0.5 * std::asin(r);
        for (int i = 0; i < half; ++i) {
            for (int sign = -1; sign <= 1; sign += 2) {
                const double sn = std::sin(asr * (1.0 + sign * gx[i]));
                bvn += gw[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
            }
        }
        bvn = bvn * asr / kTwoPi + norm_cdf(-h) * norm_cdf(-k);
    } else {
        double kk = k;
        if (r < 0.0) { kk = -kk; hk = -hk; }
        const double as = (1.0 - r) * (1.0 + r);
        const double a = std::sqrt(as);
        const double bs = (h - kk) * (h - kk);
        const double c = (4.0 - hk) / 8.0;
        const double d = (12.0 - hk) / 80.0;
        const double asr0 = -0.5 * (bs / as + hk);
        if (asr0 > -100.0) {
            bvn = a * std::exp(asr0) *
                  (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
        }
        if (hk > -100.0) {
            const double b = std::sqrt(bs);
            const double sp = std::sqrt(kTwoPi) * norm_cdf(-b / a);
            bvn -= std::exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
        }
        const double ah = 0.5 * a;
        double accum = 0.0;
        for (int i = 0; i < half; ++i) {
            for (int sign = -1; sign <= 1; sign += 2) {
                const double x = ah * (1.0 + sign * gx[i]);
                const double xs = x * x;
                const double asr = -0.5 * (bs / xs + hk);
                if (asr <= -100.0) continue;
                const double rs = std::sqrt(1.0 - xs);
                const double sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
                const double ep = std::exp(-0.5 * hk * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
                accum += gw[i] * std::exp(asr) * (sp - ep);
            }
        }
        bvn = (ah * accum - bvn) / kTwoPi;
        if (r > 0.0) {
            bvn += norm_cdf(-std::max(h, kk));
        } else if (h >= kk) {
            bvn = -bvn;
        } else {
            const double l = (h < 0.0) ? norm_cdf(kk) - norm_cdf(h)
                                       : norm_cdf(-h) - norm_cdf(-kk);
            bvn = l - bvn;
        }
    }
    return std::clamp(bvn, 0.0, 1.0);
}

} // namespace

double norm_pdf(double x) noexcept {
    if (std::isinf(x)) return 0.0;
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double norm_cdf(double x) {
    if (std::isnan(x)) throw DomainError("norm_cdf: NaN argument");
    if (std::isinf(x)) return x > 0.0 ? 1.0 : 0.0;
    return 0.5 * std::erfc(-x * kInvSqrt2);
}

double norm_quantile(double p) {
    // Wichura's rational approximations (three regimes in |p - 1/2|,
    // accurate to ~1e-16), then one Newton step x -= (Phi(x) - p)/phi(x)
    // that pins the round-trip to machine precision away from the extreme
    // tails where phi underflows.
    if (!(p > 0.0 && p < 1.0)) throw DomainError("norm_quantile: p must lie in (0,1)");

    static constexpr double a[8] = {
        3.3871328727963666080e0,  1.3314166789178437745e+2, 1.9715909503065514427e+3,
        1.3731693765509461125e+4, 4.5921953931549871457e+4, 6.7265770927008700853e+4,
        3.3430575583588128105e+4, 2.5090809287301226727e+3};
    static constexpr double b[7] = {
        4.2313330701600911252e+1, 6.8718700749205790830e+2, 5.3941960214247511077e+3,
        2.1213794301586595867e+4, 3.9307895800092710610e+4, 2.8729085735721942674e+4,
        5.2264952788528545610e+3};
    static constexpr double c[8] = {
        1.42343711074968357734e0,  4.63033784615654529590e0,  5.76949722146069140550e0,
        3.64784832476320460504e0,  1.27045825245236838258e0,  2.41780725177450611770e-1,
        2.27238449892691845833e-2, 7.74545014278341407640e-4};
    static constexpr double d[7] = {
        2.05319162663775882187e0,  1.67638483018380384940e0,  6.89767334985100004550e-1,
        1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
        1.05075007164441684324e-9};
    static constexpr double e[8] = {
        6.65790464350110377720e0,  5.46378491116411436990e0,  1.78482653991729133580e0,
        2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
        2.71155556874348757815e-5, 2.01033439929228813265e-7};
    static constexpr double f[7] = {
        5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
        7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
        2.04426310338993978564e-15};

    const double q = p - 0.5;
    double x;
    if (std::fabs(q) <= 0.425) {
        const double s = 0.180625 - q * q;
        x = q *
            (((((((a[7] * s + a[6]) * s + a[5]) * s + a[4]) * s + a[3]) * s + a[2]) * s + a[1]) * s + a[0]) /
            (((((((b[6] * s + b[5]) * s + b[4]) * s + b[3]) * s + b[2]) * s + b[1]) * s + b[0]) * s + 1.0);
    } else {
        double s = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
        if (s <= 5.0) {
            s -= 1.6;
            x = (((((((c[7] * s + c[6]) * s + c[5]) * s + c[4]) * s + c[3]) * s + c[2]) * s + c[1]) * s + c[0]) /
                (((((((d[6] * s + d[5]) * s + d[4]) * s + d[3]) * s + d[2]) * s + d[1]) * s + d[0]) * s + 1.0);
        } else {
            s -= 5.0;
            x = (((((((e[7] * s + e[6]) * s + e[5]) * s + e[4]) * s + e[3]) * s + e[2]) * s + e[1]) * s + e[0]) /
                (((((((f[6] * s + f[5]) * s + f[4]) * s + f[3]) * s + f[2]) * s + f[1]) * s + f[0]) * s + 1.0);
        }
        if (q < 0.0) x = -x;
    }

    const double dens = norm_pdf(x);
    if (dens > 1e-300) {
        x -= (norm_cdf(x) - p) / dens;
    }
    return x;
}

double bvn_pdf(double x, double y, double r) {
    if (std::fabs(r) >= 1.0 || std::isnan(r)) {
        throw DomainError("bvn_pdf: correlation must lie in (-1,1)");
    }
    const double omr2 = (1.0 - r) * (1.0 + r);
    const double z = (x * x - 2.0 * r * x * y + y * y) / omr2;
    return std::exp(-0.5 * z) / (kTwoPi * std::sqrt(omr2));
}

double bvn_cdf(double x, double y, double r) {
    if (std::isnan(x) || std::isnan(y) || std::isnan(r)) {
        throw DomainError("bvn_cdf: NaN argument");
    }
    if (std::fabs(r) >= 1.0) {
        throw DomainError("bvn_cdf: correlation must lie in (-1,1)");
    }
    // P(X <= x, Y <= y) = P(-X > -x, -Y > -y) with the same correlation.
    return bvn_upper(-x, -y, r);
}

} // namespace eqpart
