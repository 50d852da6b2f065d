#pragma once

#include <cstdint>
#include <random>

namespace treednf {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Uniform [0, 1) draw for cell (a, b) of the stream named by `seed`:
/// mix64(mix64(mix64(seed) + a) + b), top 53 bits. Each cell is independent
/// of evaluation order, so results do not depend on scheduling.
constexpr double stream_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  const std::uint64_t bits = mix64(mix64(mix64(seed) + a) + b);
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Portable uniform draws from a standard engine. std::uniform_*_distribution
/// differ between standard libraries, the engine sequence does not.
inline double uniform01(std::mt19937_64& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

inline std::size_t uniform_index(std::mt19937_64& engine, std::size_t n) {
  const auto i = static_cast<std::size_t>(uniform01(engine) * static_cast<double>(n));
  return i < n ? i : n - 1;
}

}  // namespace treednf
