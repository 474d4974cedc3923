#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cpes {

using Rng = std::mt19937_64;

// splitmix64 finalizer; spreads nearby seeds across the state space.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Independent stream for one subsystem of one run. Streams are keyed by a
/// fixed label, so adding a subsystem never shifts another one's draws.
inline Rng stream(std::uint64_t master_seed, std::string_view label) {
    return Rng{mix64(master_seed ^ fnv1a(label))};
}

}  // namespace cpes
