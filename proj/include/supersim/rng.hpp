#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace supersim {

// SplitMix64 finalizer (Steele, Lea, Flood). Used only for seed derivation.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// FNV-1a over a label, so substream names map to fixed 64-bit constants.
constexpr std::uint64_t label_hash(std::string_view label) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Derives an independent child seed from a parent seed and a label.
///
/// derive_seed(s, "choices") and derive_seed(s, "selections") are unrelated
/// 64-bit values for every s; chaining derive_seed(derive_seed(s, a), i)
/// gives per-replica seeds.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t label) noexcept {
    return splitmix64(splitmix64(parent) ^ splitmix64(label + 0x632BE59BD9B4E019ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::string_view label) noexcept {
    return derive_seed(parent, label_hash(label));
}

/// xoshiro256** generator (Blackman, Vigna). State is seeded from a single
/// 64-bit value by four SplitMix64 steps, which never yields the all-zero state.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed) noexcept {
        std::uint64_t x = seed;
        for (auto& word : s_) {
            x += 0x9E3779B97F4A7C15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            word = z ^ (z >> 31);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept {
        const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = std::rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1].
    double uniform_open_zero() noexcept { return 1.0 - uniform(); }

    /// Uniform integer in [0, bound) by a single 128-bit multiply (Lemire),
    /// without rejection. The bias is at most bound / 2^64.
    std::uint32_t below(std::uint32_t bound) noexcept {
        const auto wide = static_cast<unsigned __int128>((*this)()) * bound;
        return static_cast<std::uint32_t>(wide >> 64);
    }

    /// Exponential variate with the given rate, by inversion.
    double exponential(double rate) noexcept { return -std::log(uniform_open_zero()) / rate; }

    /// Geometric variate on {0, 1, ...} with Pr(X >= k) = p^k.
    std::uint32_t geometric_tail(double p) noexcept {
        if (p <= 0.0) return 0;
        return static_cast<std::uint32_t>(std::floor(std::log(uniform_open_zero()) / std::log(p)));
    }

private:
    std::uint64_t s_[4];
};

}  // namespace supersim
