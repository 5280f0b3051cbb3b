#include "vfdt_rf/random.hpp"

#include <cmath>
#include <numbers>

namespace vfdt_rf {

namespace {
constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t RandomSource::next_u64() noexcept {
    ++counter_;
    return splitmix64_mix(seed_ + counter_ * golden_gamma);
}

double RandomSource::uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RandomSource::below(std::uint64_t n) noexcept {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
}

double RandomSource::gaussian() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_gaussian_;
    }
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_gaussian_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

RandomSource RandomSource::split(std::uint64_t stream_id) const noexcept {
    // Double mixing decorrelates children from each other and from the parent.
    return RandomSource(splitmix64_mix(splitmix64_mix(seed_ ^ 0xA0761D6478BD642FULL) + stream_id * golden_gamma));
}

}  // namespace vfdt_rf
