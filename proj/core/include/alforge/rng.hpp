#pragma once

#include <cstdint>
#include <random>

namespace alforge {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for sub-stream `index` of purpose `tag` under `seed`. Streams with
/// different (tag, index) pairs are statistically independent.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag,
                                    std::uint64_t index = 0) {
  return mix64(mix64(seed ^ mix64(tag)) + index);
}

// Stream tags.
namespace stream {
inline constexpr std::uint64_t kStartSet = 1;
inline constexpr std::uint64_t kModelInit = 2;
inline constexpr std::uint64_t kTraining = 3;
inline constexpr std::uint64_t kSelection = 4;
inline constexpr std::uint64_t kScoring = 5;
inline constexpr std::uint64_t kData = 6;
}  // namespace stream

}  // namespace alforge
