#pragma once

#include <cstdint>
#include <random>

namespace ivforge {

// SplitMix64 finalizer; the per-replication streams are independent of the
// scheduling order because each seed is a pure hash of (master, rep, grid).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t rep, std::uint64_t grid = 0) {
  return splitmix64(splitmix64(master + 0x9E3779B97F4A7C15ull * (grid + 1)) +
                    0x9E3779B97F4A7C15ull * (rep + 1));
}

inline std::mt19937_64 make_engine(std::uint64_t seed) { return std::mt19937_64(splitmix64(seed)); }

}  // namespace ivforge
