#pragma once

#include <cstdint>
#include <cmath>

namespace gmis {

inline constexpr double kPi = 3.14159265358979323846;

// Counter-based random stream. Each draw hashes (key, counter), so streams
// can be split into statistically independent substreams without touching
// the parent. Output sequence depends only on (key, counter), which makes
// every experiment reproducible regardless of thread scheduling.
class RngStream {
public:
    RngStream() = default;
    explicit RngStream(std::uint64_t seed) : key_(mix(seed ^ kGolden)) {}

    // Derived substream; `tag` distinguishes siblings.
    RngStream child(std::uint64_t tag) const {
        RngStream s;
        s.key_ = mix(key_ + kGolden * (tag + 1));
        return s;
    }
    RngStream child(std::uint64_t a, std::uint64_t b) const {
        return child(a).child(b);
    }

    std::uint64_t next_u64() { return mix(key_ + kGolden * ++counter_); }

    // Uniform in [0,1).
    double next_double() {
        return double(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller (two uniforms per draw, no caching,
    // so the stream position stays predictable).
    double next_normal() {
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    // Uniform integer in [0, n).
    std::uint32_t next_below(std::uint32_t n) {
        return std::uint32_t(next_u64() % n);
    }

private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

    // SplitMix64 finalizer.
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30; z *= 0xbf58476d1ce4e5b9ull;
        z ^= z >> 27; z *= 0x94d049bb133111ebull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

} // namespace gmis
