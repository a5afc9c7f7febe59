#pragma once

#include <cstdint>
#include <string_view>

#include "mopul/linalg.hpp"

namespace mopul {

/// Counter-based deterministic generator. Streams are derived by hashing
/// (seed, labels, counters), so drawing order never depends on program
/// structure and results are identical across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(mix(seed ^ kPhi)) {}

    /// Child stream for a named purpose plus an index (instance, stage, ...).
    Rng derive(std::string_view label, std::uint64_t index = 0) const;

    std::uint64_t next_u64();
    /// Uniform on [0, 1), 53-bit resolution.
    double next_uniform();
    /// Uniform on [lo, hi).
    double next_uniform(double lo, double hi);
    /// Standard normal via the inverse CDF, so a single u64 maps to a
    /// single deterministic draw.
    double next_normal();
    double next_normal(double mean, double stddev);

    Vector uniform_vector(Index dim, double lo, double hi);
    Vector normal_vector(Index dim, double mean, double stddev);
    Matrix normal_matrix(Index rows, Index cols, double mean, double stddev);

private:
    static constexpr std::uint64_t kPhi = 0x9e3779b97f4a7c15ULL;
    static std::uint64_t mix(std::uint64_t v);
    std::uint64_t state_;
};

/// Inverse standard normal CDF (Acklam's rational approximation with one
/// Halley refinement step); exposed for direct testing.
double inverse_normal_cdf(double u);

}  // namespace mopul
