#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace md3 {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Named sub-seed: splitmix64(base ^ fnv1a64(name)). Every consumer of
/// randomness derives its own stream from the run seed and a fixed name, so a
/// partial re-run draws exactly what the full run drew for that component.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(base ^ h);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view name, std::uint64_t index) {
    return splitmix64(derive_seed(base, name) + index);
}

} // namespace md3
