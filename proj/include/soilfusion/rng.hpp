#pragma once

// Seeded random streams.
//
// The standard <random> distributions are implementation-defined, so the
// conversions from raw 64-bit draws to doubles, bounded integers and normals
// are spelled out here. std::mt19937_64 itself is fully specified, which makes
// every stream bit-reproducible across standard libraries.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

namespace soilfusion {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Child seed for an independent stream. The rule is
//   child = mix64(mix64(seed) ^ mix64(stream + 1))
// and is the only way seeds are derived anywhere in the library.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix64(mix64(seed) ^ mix64(stream + 1));
}

// Stream identifiers for derive_seed. Values are part of the reproducibility
// contract; do not renumber.
namespace streams {
inline constexpr std::uint64_t kSplit = 1;
inline constexpr std::uint64_t kEvalForest = 2;
inline constexpr std::uint64_t kSimForest = 3;
inline constexpr std::uint64_t kGprNoise = 4;
inline constexpr std::uint64_t kSweep = 5;

// Per (plot, position) noise stream for Approach-1 interpolation.
constexpr std::uint64_t gpr_noise(int plot_id, int position_index) noexcept {
  return (kGprNoise << 48) ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(plot_id)) << 16) ^
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(position_index));
}
}  // namespace streams

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in the open interval (lo, hi); requires lo < hi.
  double uniform_open(double lo, double hi) {
    for (;;) {
      const double v = lo + (hi - lo) * uniform();
      if (v > lo && v < hi) return v;
    }
  }

  // Uniform integer in [0, n) by rejection; n > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % n;
  }

  // Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace soilfusion
