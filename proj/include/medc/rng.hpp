#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace medc {

/// Deterministic PRNG stream derived from a (master seed, dataset,
/// corruption, severity, image index) tuple. Identical tuples yield
/// identical byte streams on every platform; distinct tuples yield
/// statistically independent streams.
///
/// Derivation hashes the length-prefixed tuple with FNV-1a (64-bit), then
/// expands the digest through splitmix64 into xoshiro256++ state. The
/// algorithm identifier below is recorded in generation manifests; bump it
/// if any part of the derivation or the generator changes.
class RngStream {
public:
    static constexpr std::string_view kAlgorithm = "fnv1a64+splitmix64/xoshiro256pp/v1";

    /// Severity code 0 means "clean" (no severity), 1..5 a severity level.
    struct Derivation {
        std::uint64_t master_seed = 0;
        std::string dataset_id;
        std::string corruption_id;
        int severity_code = 0;
        std::uint64_t image_index = 0;
    };

    static RngStream derive(std::uint64_t master_seed, std::string_view dataset_id,
                            std::string_view corruption_id, int severity_code,
                            std::uint64_t image_index);

    std::uint64_t next_u64();

    /// Uniform double in [0,1), 53-bit resolution.
    double uniform();
    double uniform(double lo, double hi);

    /// Uniform integer in [lo,hi], inclusive, unbiased (rejection sampling).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    /// Standard normal via Box-Muller (second value cached).
    double normal();
    double normal(double mean, double stddev);

    /// Exact Poisson sampler: multiplicative inversion below mean 10,
    /// transformed rejection (PTRD) above. No normal approximation, so
    /// small means (dark pixels under shot noise) stay exact.
    std::int64_t poisson(double mean);

    const Derivation& derivation() const { return derivation_; }

private:
    explicit RngStream(Derivation derivation);

    std::uint64_t bounded(std::uint64_t n);

    std::array<std::uint64_t, 4> state_{};
    Derivation derivation_;
    double spare_normal_ = 0.0;
    bool have_spare_normal_ = false;
};

}  // namespace medc
