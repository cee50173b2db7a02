#pragma once

#include <cstdint>

namespace lclab {

// Deterministic splitmix64 stream. We avoid <random> distributions because
// their output is implementation-defined; traces and goldens must match
// across compilers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Unbiased integer in [0, k), k >= 1. Rejection sampling on the top bits.
  std::uint64_t below(std::uint64_t k) {
    if (k <= 1) return 0;
    std::uint64_t mask = ~0ULL >> __builtin_clzll((k - 1) | 1);
    for (;;) {
      std::uint64_t v = next() & mask;
      if (v < k) return v;
    }
  }

  bool bit() { return (next() >> 63) != 0; }

  // 53-bit uniform in [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return unit() < p; }

  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    // one splitmix64 round over the xor; good enough to decorrelate seeds
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

}  // namespace lclab
