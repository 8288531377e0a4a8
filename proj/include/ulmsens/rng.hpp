#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace ulmsens {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// One step of the splitmix64 sequence starting from `state`.
constexpr std::uint64_t splitmix64_next(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += kGoldenGamma);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Stateless mixer: first splitmix64 output for a given seed.
constexpr std::uint64_t splitmix64(std::uint64_t seed) noexcept {
    return splitmix64_next(seed);
}

/// xoshiro256** 1.0, seeded by expanding a 64-bit value through splitmix64.
///
/// All distribution transforms below are spelled out explicitly instead of
/// using <random> distributions, whose output is implementation-defined.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit constexpr Xoshiro256(std::uint64_t seed) noexcept {
        for (auto& word : s_) word = splitmix64_next(seed);
    }

    // Raw state, for reproducing published reference sequences.
    static constexpr Xoshiro256 from_state(std::array<std::uint64_t, 4> state) noexcept {
        Xoshiro256 g(0);
        g.s_ = state;
        return g;
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    constexpr result_type operator()() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) noexcept {
        return lo + (hi - lo) * uniform();
    }

    // Uniform integer in [0, n) by multiply-high; n > 0.
    std::uint64_t below(std::uint64_t n) noexcept {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>((*this)()) * n) >> 64);
    }

    // Standard normal via Box-Muller (one output per call, second discarded).
    double normal() noexcept {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Poisson variate by Knuth multiplication. Means above 16 are split
    /// into equal parts so exp(-mean) never underflows; the sum of
    /// independent Poisson parts is Poisson with the total mean.
    std::uint64_t poisson(double mean) noexcept {
        if (!(mean > 0.0)) return 0;
        const auto parts = static_cast<int>(std::ceil(mean / 16.0));
        const double part_mean = mean / parts;
        const double limit = std::exp(-part_mean);
        std::uint64_t total = 0;
        for (int p = 0; p < parts; ++p) {
            double prod = uniform();
            while (prod > limit) {
                ++total;
                prod *= uniform();
            }
        }
        return total;
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> s_{};
};

}  // namespace ulmsens
