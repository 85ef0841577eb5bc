// rng.hpp: Seeded random streams with counter-derived sub-seeds

#pragma once

#include <cstdint>
#include <random>

namespace qpi {

using RandomStream = std::mt19937_64;

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Sub-seed for (trajectory, reservoir) depends only on the indices, never on the
// order in which workers pick up trajectories.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t trajectory, std::uint64_t reservoir) {
    return mix64(mix64(mix64(base) ^ trajectory) ^ (reservoir + 0x51ed270b27a3c1f5ULL));
}

inline RandomStream make_stream(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return RandomStream(seq);
}

} // namespace qpi
