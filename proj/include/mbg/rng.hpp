#pragma once

#include <cmath>
#include <cstdint>

#include "mbg/errors.hpp"

// Counter-based pseudo-random generator in the SplitMix64 family: the i-th
// output is a fixed 64-bit mix of key + i*golden, so streams are jumpable,
// platform-stable and trivially parallel. Every sampler below consumes the
// stream sequentially, which keeps results a pure function of (seed, stream).

namespace mbg {

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(mix(seed) + stream)) {}

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGolden); }

  void jump(std::uint64_t n) { counter_ += n; }
  std::uint64_t counter() const { return counter_; }

  // strictly inside (0,1)
  double uniform() {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1p-52;
  }

  // Box-Muller; fixed cost of two uniforms per normal.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Marsaglia-Tsang, unit scale.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw domain_error("gamma sampler requires shape > 0");
    if (shape < 1.0) {
      const double boost = std::pow(uniform(), 1.0 / shape);
      return boost * gamma(shape + 1.0);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double chi_square(double df) { return 2.0 * gamma(0.5 * df); }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace mbg
