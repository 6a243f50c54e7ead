#pragma once

// Seeded, splittable random number generation.  All distributions are
// produced from the raw 64-bit stream of std::mt19937_64 (whose output
// sequence is fixed by the C++ standard) through inverse-CDF transforms,
// so a given seed yields bit-identical samples on every platform and
// toolchain.  Parallel drivers derive one independent seed per task with
// derive_seed, never by sharing a stream, which keeps results invariant
// under the number of worker threads.

#include <cstdint>
#include <random>
#include <string>

namespace eqpart {

// Identifies the seed-to-sample pipeline recorded in sample metadata.
inline const std::string kGeneratorId = "mt19937_64/inverse-cdf/v1";

// splitmix64 finalizer; mixes (base, index) into a well-spread 64-bit
// value so per-task substreams are decorrelated.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on the open interval (0,1) with 53-bit resolution; never
    // returns 0 or 1, so quantile transforms are always in-domain.
    double uniform() {
        const std::uint64_t bits = engine_() >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via the quantile transform.
    double normal();

    // chi(k)-distributed radius: sqrt of a sum of k squared iid normals.
    double chi(int k);

    // chi-square(k) draw.
    double chi_square(int k);

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

} // namespace eqpart
