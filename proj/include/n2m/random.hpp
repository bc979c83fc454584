#pragma once

// Counter-keyed random streams. Every draw in the library is a pure function of
// a 64-bit key, so runs are bit-identical across processes and platforms.

#include <cstdint>
#include <initializer_list>
#include <span>

namespace n2m {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t mix_keys(std::initializer_list<std::uint64_t> parts) noexcept {
    std::uint64_t h = 0x6A09E667F3BCC909ULL;
    for (auto p : parts) h = splitmix64(h ^ splitmix64(p));
    return h;
}

/// FNV-1a over a byte sequence.
constexpr std::uint64_t fnv1a(std::span<const std::uint8_t> bytes,
                              std::uint64_t h = 0xCBF29CE484222325ULL) noexcept {
    for (auto b : bytes) {
        h ^= b;
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// SplitMix64 sequence seeded by a key.
class Stream {
public:
    explicit constexpr Stream(std::uint64_t key) noexcept : state_(key) {}

    constexpr std::uint64_t next() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 bits of resolution.
    constexpr double uniform() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    constexpr bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Uniform integer in [0, n) by rejection; n > 0.
    constexpr std::uint64_t below(std::uint64_t n) noexcept {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x = next();
        while (x >= limit) x = next();
        return x % n;
    }

    constexpr int bit() noexcept {
        if (bits_left_ == 0) {
            bits_ = next();
            bits_left_ = 64;
        }
        const int b = static_cast<int>(bits_ & 1U);
        bits_ >>= 1;
        --bits_left_;
        return b;
    }

private:
    std::uint64_t state_;
    std::uint64_t bits_ = 0;
    int bits_left_ = 0;
};

}  // namespace n2m
