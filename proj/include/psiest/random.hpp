#pragma once

#include <cstdint>
#include <random>

namespace psiest {

/// SplitMix64 finalizer; derives independent per-trial seeds from
/// (suite seed, trial index).
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// mt19937_64 with distribution code fixed here rather than taken from the
/// standard library, so seeded draws are identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on [a, b).
  double uniform(double a, double b) { return a + (b - a) * unit(); }

  /// Uniform on (a, b]: never returns a.
  double uniform_open_left(double a, double b) { return b - (b - a) * unit(); }

  /// Uniform integer in [lo, hi].
  std::uint64_t integer(std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t span = hi - lo + 1;
    if (span == 0) return engine_();
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % span);
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return lo + v % span;
  }

  int integer(int lo, int hi) {
    return static_cast<int>(integer(std::uint64_t{0}, static_cast<std::uint64_t>(hi - lo))) + lo;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace psiest
