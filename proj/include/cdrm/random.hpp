#pragma once

#include <cstdint>
#include <random>

namespace cdrm {

// SplitMix64 finaliser. Used to derive statistically independent seeds from
// (seed, counter) pairs so that each stream depends only on its own index.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t counter) {
  return splitmix64(splitmix64(seed) ^ splitmix64(counter + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                    std::uint64_t b) {
  return derive_seed(derive_seed(seed, a), b);
}

using Rng = std::mt19937_64;

// Draws are made through these helpers rather than <random> distributions
// where bit-exact cross-library reproducibility matters.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double low, double high) {
  return low + (high - low) * uniform01(rng);
}

// Standard normal via Box-Muller; one value per call.
double standard_normal(Rng& rng);

}  // namespace cdrm
