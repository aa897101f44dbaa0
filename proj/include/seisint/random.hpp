#pragma once

// Portable sampling on top of std::mt19937_64, whose output sequence is fixed
// by the standard. The std distributions are implementation-defined, so the
// conversions used for reproducible data live here.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <utility>

namespace seisint::random {

using Engine = std::mt19937_64;

/// Top 53 bits scaled into [0, 1).
inline double uniform01(Engine& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Engine& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Box-Muller; consumes two draws per sample.
inline double normal(Engine& rng, double mean, double sd) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Walks i = n-1 .. 1, swapping i with j = rng() % (i + 1).
template <typename T>
void fisher_yates(std::span<T> items, Engine& rng) {
  for (std::size_t i = items.size(); i-- > 1;) {
    const auto j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(items[i], items[j]);
  }
}

}  // namespace seisint::random

namespace seisint::random {

/// Independent sub-seed for stream `stream` of a run seed (splitmix64 step).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace seisint::random
