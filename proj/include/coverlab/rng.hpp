#pragma once

#include <cmath>
#include <cstdint>

namespace coverlab {

// splitmix64 stream. The internal state advances by a fixed odd constant, so
// the whole sequence is a pure function of (master seed, stream index); that
// is what makes trial results independent of how trials are scheduled across
// workers. Satisfies UniformRandomBitGenerator, so it can drive the boost
// distribution samplers.
class Rng {
public:
  using result_type = uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ull; }

  explicit Rng(uint64_t seed, uint64_t stream = 0) {
    state_ = mix(mix(seed) + mix(stream * kGamma + 1));
  }

  uint64_t operator()() {
    state_ += kGamma;
    return mix(state_);
  }

  // uniform in [0,1)
  double uniform() { return double((*this)() >> 11) * 0x1.0p-53; }

  // unit-rate exponential; finite because uniform() < 1
  double exponential() { return -std::log1p(-uniform()); }

  // uniform integer in [0,n); Lemire multiply-shift with rejection, unbiased
  uint32_t below(uint32_t n) {
    uint64_t m = uint64_t(uint32_t((*this)())) * n;
    if (uint32_t(m) < n) {
      uint32_t t = (-n) % n;
      while (uint32_t(m) < t) m = uint64_t(uint32_t((*this)())) * n;
    }
    return uint32_t(m >> 32);
  }

private:
  static constexpr uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  static uint64_t mix(uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  uint64_t state_;
};

}  // namespace coverlab
