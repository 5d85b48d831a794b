#pragma once

#include <cassert>
#include <cstdint>

namespace onearm {

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a + 0x9E3779B97F4A7C15ull * (b + 1));
}

// SplitMix64 run in counter mode.  Stream s owns the counter block
// [s << 40, (s+1) << 40), so distinct streams of one seed can never overlap
// and jump-ahead is O(1).  Good enough statistically for Monte Carlo use;
// the point here is reproducible parallelism.
class Rng {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
  static constexpr unsigned kStreamShift = 40;

  Rng() : Rng(0, 0) {}
  Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : base_(mix64(seed ^ 0x5851F42D4C957F2Dull)),
        counter_(stream << kStreamShift) {}

  std::uint64_t next() { return mix64(base_ + (counter_++) * kGamma); }

  // uniform in [0, 1)
  double u01() { return (next() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n), n > 0 (Lemire's debiased multiply)
  std::uint64_t below(std::uint64_t n) {
    assert(n > 0);
    unsigned __int128 m = (unsigned __int128)next() * n;
    auto lo = (std::uint64_t)m;
    if (lo < n) {
      std::uint64_t t = (0 - n) % n;
      while (lo < t) {
        m = (unsigned __int128)next() * n;
        lo = (std::uint64_t)m;
      }
    }
    return (std::uint64_t)(m >> 64);
  }

  bool bernoulli(double p) { return u01() < p; }

  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t base_;
  std::uint64_t counter_;
};

}  // namespace onearm
