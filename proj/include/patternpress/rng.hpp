// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace patternpress {

inline constexpr std::uint64_t kDefaultSeed = 0xC0FFEE;

// SplitMix64 finalizer; used to derive decorrelated per-stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed) ^ mix64(stream + 0x632BE59BD9B4E019ull));
}

// Seedable generator. Independent streams are obtained from (seed, stream)
// so parallel trials never share a sequence, and the result of trial t does
// not depend on how trials are scheduled.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = kDefaultSeed) : engine_(mix64(seed)) {}
  Rng(std::uint64_t seed, std::uint64_t stream)
      : engine_(derive_seed(seed, stream)) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound) for bound >= 1 (Lemire's method).
  std::uint64_t below(std::uint64_t bound) {
    unsigned __int128 prod =
        static_cast<unsigned __int128>(engine_()) * bound;
    auto low = static_cast<std::uint64_t>(prod);
    if (low < bound) {
      const std::uint64_t threshold = -bound % bound;
      while (low < threshold) {
        prod = static_cast<unsigned __int128>(engine_()) * bound;
        low = static_cast<std::uint64_t>(prod);
      }
    }
    return static_cast<std::uint64_t>(prod >> 64);
  }

  // Beta(a, b) via two gamma draws.
  double beta(double a, double b);

 private:
  std::mt19937_64 engine_;
};

inline double Rng::beta(double a, double b) {
  const double x = std::gamma_distribution<double>(a, 1.0)(*this);
  const double y = std::gamma_distribution<double>(b, 1.0)(*this);
  if (x + y == 0.0) {
    // Both shapes tiny enough to underflow; fall back to the mean.
    return a / (a + b);
  }
  return x / (x + y);
}

}  // namespace patternpress
