#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace storesim {

/// splitmix64 output function; bijective on 64-bit words.
inline std::uint64_t mix_bits(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derives the seed of replica `index` from a base seed. Streams for
/// distinct indices are independent for all practical purposes and do
/// not depend on scheduling order.
inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t index) {
    constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ULL;
    return mix_bits(mix_bits(seed + golden) ^ (index + 0xD1B54A32D192ED03ULL));
}

/// xoshiro256++ with splitmix64 seeding. Fully specified: identical seeds
/// give identical draws on every platform, which the reproducibility
/// guarantees of the simulators rely on (std::`*_distribution` does not
/// promise that).
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ULL;
        std::uint64_t s = seed;
        for (auto& word : state_) {
            s += golden;
            word = mix_bits(s);
        }
    }

    static Rng substream(std::uint64_t seed, std::uint64_t index) {
        return Rng(derive_stream_seed(seed, index));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1]; safe as a log argument.
    double uniform01_open() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double exponential(double rate) { return -std::log(uniform01_open()) / rate; }

    /// Standard normal via Box-Muller; the second value of each pair is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform01_open()));
        const double a = 2.0 * 3.14159265358979323846 * uniform01();
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace storesim
