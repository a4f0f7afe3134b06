#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace fluctuate {

using Rng = std::mt19937_64;

/// Uniform variate in the open interval (0, 1).
inline double uniform_open(Rng& rng) {
  constexpr double kScale = 0x1.0p-53;
  return (static_cast<double>(rng() >> 11) + 0.5) * kScale;
}

/// Exponential variate with the given rate, by inversion.
inline double exponential(Rng& rng, double rate) { return -std::log(uniform_open(rng)) / rate; }

/// SplitMix64 finalizer; decorrelates (seed, index) pairs into stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent generator for substream `index` of a run seeded with `seed`.
inline Rng substream(std::uint64_t seed, std::uint64_t index) {
  return Rng(mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL)));
}

}  // namespace fluctuate
