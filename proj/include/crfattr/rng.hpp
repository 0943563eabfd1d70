#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace crfattr {

/// Deterministic pseudo-random source. All draws go through explicit
/// mantissa/rejection arithmetic so the produced streams are identical
/// across standard-library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unbiased integer in [0, bound); bound must be nonzero.
  uint64_t below(uint64_t bound) {
    const uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
      uint64_t r = gen_();
      if (r >= threshold) return r % bound;
    }
  }

  /// Standard normal via Box-Muller.
  double normal() {
    constexpr double two_pi = 6.283185307179586476925286766559;
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * uniform());
  }

  /// Fisher-Yates shuffle using this stream.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives an independent child seed for a named stream/index.
inline uint64_t derive_seed(uint64_t base, uint64_t stream, uint64_t index = 0) {
  uint64_t h = splitmix64(base);
  h = splitmix64(h ^ (0x9E3779B97F4A7C15ULL + stream));
  h = splitmix64(h ^ (0xC2B2AE3D27D4EB4FULL + index));
  return h;
}

}  // namespace crfattr
