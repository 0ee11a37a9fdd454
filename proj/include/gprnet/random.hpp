#pragma once

#include <cstdint>
#include <random>

namespace gprnet {

/// Every random decision in the library draws from an explicitly passed Rng.
using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a master seed and up to two
/// coordinates (stream tag, index).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  return mix64(mix64(mix64(master) ^ a) ^ (b * 0xd1b54a32d192ed03ULL + 1));
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Stream tags passed to derive_seed.
namespace stream {
inline constexpr std::uint64_t kSplit = 1;
inline constexpr std::uint64_t kInit = 2;
inline constexpr std::uint64_t kTrain = 3;
inline constexpr std::uint64_t kEval = 4;
inline constexpr std::uint64_t kSubsample = 5;
inline constexpr std::uint64_t kSynth = 6;
}  // namespace stream

}  // namespace gprnet
