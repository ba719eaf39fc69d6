#pragma once

// Seeded random streams with a platform-independent bit recipe. //

#include <cstdint>
#include <random>

namespace dyncopy {

using prng_t = std::mt19937_64;

/// splitmix64 finalizer, used to derive independent sub-seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of the `stream`-th independent stream derived from `seed`.
///
/// Every component that needs its own randomness (network init, probes,
/// sampling, MC chain) takes a distinct stream id so that changing one
/// component's draws never shifts another's.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream)
{
    return splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(prng_t& prng) { return static_cast<double>(prng() >> 11) * 0x1.0p-53; }

/// Uniform double in [lo, hi).
inline double uniform(prng_t& prng, double lo, double hi) { return lo + (hi - lo) * uniform01(prng); }

/// Uniform index in [0, n).
inline std::size_t uniform_index(prng_t& prng, std::size_t n) { return static_cast<std::size_t>(prng() % n); }

}  // namespace dyncopy
