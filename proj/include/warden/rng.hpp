#pragma once

#include <cstdint>
#include <random>

namespace warden {

/// std::mt19937_64 plus an unbiased bounded draw. Both the engine and the
/// rejection rule are fully specified, so sequences are identical on every
/// platform (unlike std::uniform_int_distribution).
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, m). m must be positive.
  std::uint64_t bounded(std::uint64_t m) {
    constexpr auto kMax = std::mt19937_64::max();
    const std::uint64_t limit = kMax - (kMax % m + 1) % m;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x > limit);
    return x % m;
  }

  /// Uniform in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer over (seed, stream); gives each tree or fold its own
/// independent seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace warden
