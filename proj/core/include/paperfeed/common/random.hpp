#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace paperfeed {

/// Seeded generator whose derived draws (bounded integers, uniforms,
/// shuffles) do not depend on the standard library's distribution
/// implementations, so seeded output is identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  /// Uniform double in [0, 1) with 53 bits of randomness.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Exponential variate with the given rate (events per unit).
  double exponential(double rate);

  /// Poisson variate (Knuth for small means, normal approximation above 500).
  std::uint64_t poisson(double mean);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; derives independent seeds from (seed, stream).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace paperfeed
