/// @file hashing.hpp
/// @brief Platform-stable hashing and seed derivation.
///
/// Every random decision in the engine is a pure function of a seed derived
/// from (run seed, item id, role name, ordinal). std::hash is not stable
/// across standard libraries, so FNV-1a and splitmix64 are used instead.
#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace hallubench {

constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t state = 0xcbf29ce484222325ULL) noexcept {
    for (unsigned char c : bytes) {
        state ^= c;
        state *= 0x100000001b3ULL;
    }
    return state;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Folds a string label into a seed.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::string_view label) noexcept {
    return splitmix64(parent ^ fnv1a64(label));
}

/// Folds an integer ordinal into a seed.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t ordinal) noexcept {
    return splitmix64(parent ^ splitmix64(ordinal + 0x632be59bd9b4e019ULL));
}

/// Maps a 64-bit value to [0, 1) with 53 bits of resolution.
constexpr double unit_interval(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Small deterministic generator for places that need a stream of draws.
class SplitMix {
public:
    explicit constexpr SplitMix(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    constexpr double uniform() noexcept { return unit_interval(next()); }

    /// Uniform integer in [0, bound).
    constexpr std::uint64_t below(std::uint64_t bound) noexcept {
        return bound == 0 ? 0 : next() % bound;
    }

private:
    std::uint64_t state_;
};

} // namespace hallubench
