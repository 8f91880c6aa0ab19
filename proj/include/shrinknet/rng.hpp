#pragma once

#include <cstdint>
#include <random>

namespace shrinknet {

// All sampling goes through mt19937_64 and Boost distributions; the <random>
// distributions are not reproducible across standard library implementations.
using Rng = std::mt19937_64;

/// Seed for task `index` under a master seed (splitmix64 finaliser over both).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline Rng make_stream(std::uint64_t master, std::uint64_t index) { return Rng(derive_seed(master, index)); }

}  // namespace shrinknet
