#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace rcdvs {

/// Seeded 64-bit stream. Uniforms lie strictly inside (0, 1) and every
/// derived quantity is computed here rather than through std distributions,
/// so a seed replays the same sequence with any standard library.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// (k + 0.5) / 2^53 for a 53-bit k: never 0, never 1.
  double uniform() {
    const auto k = engine_() >> 11;
    return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  /// Standard normal via Box-Muller (one value per call).
  double normal();

  /// Independent child stream; the same (seed, key) pair always yields the
  /// same child.
  RngStream split(std::uint64_t key) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer, used to derive child seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace rcdvs
