#pragma once

// Deterministic stream splitting: every (seed, a, b) triple gets its own
// generator so parallel and serial runs draw identical numbers.

#include <cstdint>
#include <random>

namespace relaybound {

constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0)
{
    return std::mt19937_64(splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL)));
}

} // namespace relaybound
