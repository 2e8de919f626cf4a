#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace corrmon {

/// Seed-deterministic, splittable random source.
///
/// Child streams are derived from the parent seed and a list of counters
/// through SplitMix64 mixing, so a stream's sequence depends only on the root
/// seed and its own key path, never on how many siblings were created.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }

  /// Independent child stream keyed by `keys`.
  RandomSource split(std::initializer_list<std::uint64_t> keys) const {
    std::uint64_t s = mix(seed_ ^ 0x6a09e667f3bcc909ULL);
    for (std::uint64_t k : keys) s = mix(s ^ mix(k + 0x9e3779b97f4a7c15ULL));
    return RandomSource(s);
  }

  double normal() { return normal_(engine_); }

  /// Uniform on [0, 1).
  double uniform() { return uniform_(engine_); }

  std::mt19937_64& engine() noexcept { return engine_; }

  static std::uint64_t mix(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace corrmon
