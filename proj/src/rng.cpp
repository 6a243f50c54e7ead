#include "eqpart/rng.hpp"
#include "eqpart/errors.hpp"
#include "eqpart/gaussian.hpp"

namespace eqpart {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
    // splitmix64 (Steele, Lea & Flood): advance by a Weyl increment per
    // index, then scramble.  Distinct (base, index) pairs map to
    // statistically independent seeds.
    std::uint64_t z = base + (index + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::normal() {
    return norm_quantile(uniform());
}

double Rng::chi_square(int k) {
    if (k < 1) throw DomainError("Rng::chi_square: dof must be >= 1");
    double s = 0.0;
    for (int i = 0; i < k; ++i) {
        const double z = normal();
        s += z * z;
    }
    return s;
}

double Rng::chi(int k) {
    return std::sqrt(chi_square(k));
}

} // namespace eqpart
