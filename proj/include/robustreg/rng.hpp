#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace robustreg {

// Counter-based generator: output k = mix64(key + k * golden). Streams are
// independent for distinct (seed, stream) pairs and reproducible regardless
// of thread scheduling, since state is just an incrementing counter.
class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t stream = 0)
      : key_(mix64(mix64(seed + kGolden) ^ (stream * kGolden + 0x632BE59BD9B4E019ull))) {}

  uint64_t next_u64() { return mix64(key_ + (counter_++) * kGolden); }

  // Uniform on the open interval (0,1); never returns 0 or 1.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  // Box-Muller; consumes exactly two uniforms per call (no caching, so the
  // draw count per call is fixed and streams stay alignment-stable).
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Student t via normals only: df 1 is a normal ratio, df 3 a normal over
  // the root of a mean of three squared normals.
  double student_t(int df) {
    if (df == 1) {
      const double num = normal();
      const double den = normal();
      return num / den;
    }
    if (df == 3) {
      const double z = normal();
      const double a = normal();
      const double b = normal();
      const double c = normal();
      return z / std::sqrt((a * a + b * b + c * c) / 3.0);
    }
    // Not needed elsewhere; keep the surface minimal.
    throw std::invalid_argument("student_t: only df 1 and 3 supported");
  }

  // Integer in [0, bound) by rejection, bias-free.
  uint64_t below(uint64_t bound) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % bound;
  }

 private:
  static constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;

  static uint64_t mix64(uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  uint64_t key_;
  uint64_t counter_ = 0;
};

}  // namespace robustreg
