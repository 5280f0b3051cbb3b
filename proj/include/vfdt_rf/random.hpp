#pragma once

#include <cstdint>
#include <string_view>

namespace vfdt_rf {

// Counter-based generator: draw n is a pure function of (seed, n), so output
// is bit-identical across runs and platforms and child sources derived with
// split() never overlap their parent's stream.
//
// Each draw hashes seed + (counter + 1) * golden_gamma through the SplitMix64
// finalizer. Gaussian draws use Box-Muller on two consecutive uniforms.
class RandomSource {
public:
    static constexpr std::string_view algorithm_id = "splitmix64-ctr/v1";

    explicit RandomSource(std::uint64_t seed) noexcept : seed_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t position() const noexcept { return counter_; }

    std::uint64_t next_u64() noexcept;
    // Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    // Uniform integer in [0, n); n > 0. Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n) noexcept;
    double gaussian() noexcept;

    // Independent child stream keyed by `stream_id`; does not advance this source.
    RandomSource split(std::uint64_t stream_id) const noexcept;

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
    double spare_gaussian_ = 0.0;
    bool has_spare_ = false;
};

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept;

}  // namespace vfdt_rf
