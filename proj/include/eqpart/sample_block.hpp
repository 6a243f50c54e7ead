#pragma once

// Immutable matrix of Monte Carlo draws or loaded observations, with the
// provenance needed to reproduce it exactly.

#include <Eigen/Dense>

#include <cstdint>
#include <string>

namespace eqpart {

struct SampleBlock {
    // One column per observation, one row per coordinate; row 0 is the
    // benchmark coordinate used for quantile conditioning.
    Eigen::MatrixXd data;
    std::uint64_t seed = 0;
    std::string generator_id;   // empty for data loaded from files
    std::string model_desc;     // human-readable description of the source

    int dim() const { return static_cast<int>(data.rows()); }
    std::int64_t count() const { return static_cast<std::int64_t>(data.cols()); }
};

} // namespace eqpart
