#pragma once

#include <cmath>
#include <cstdint>

namespace wdt {

// splitmix64 finalizer; full-avalanche 64-bit mix.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Key for an independent substream derived from (seed, stream index).
inline uint64_t substream_key(uint64_t seed, uint64_t stream) {
  return mix64(mix64(seed) ^ mix64(stream ^ 0x243f6a8885a308d3ull));
}

// Counter-based generator: output i is splitmix64 of key + i*gamma.  Streams
// with distinct keys are independent, ordering of draws is reproducible
// bit-for-bit across platforms and thread counts.
class Rng {
 public:
  Rng(uint64_t seed, uint64_t stream) : key_(substream_key(seed, stream)) {}
  explicit Rng(uint64_t key) : key_(key) {}

  uint64_t next_u64() {
    uint64_t z = key_ + (++ctr_) * 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Threshold comparison on the raw 64-bit draw.
  bool bernoulli(double p) {
    if (p <= 0.0) {
      next_u64();  // keep the stream position independent of p
      return false;
    }
    if (p >= 1.0) {
      next_u64();
      return true;
    }
    // p < 1 so p*2^64 <= 2^64 - 2^11 and the cast is exact.
    const uint64_t t = static_cast<uint64_t>(std::ceil(p * 0x1.0p64));
    return next_u64() < t;
  }

  // Box-Muller; second deviate cached.
  double gaussian() {
    if (have_cache_) {
      have_cache_ = false;
      return cache_;
    }
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cache_ = r * std::sin(a);
    have_cache_ = true;
    return r * std::cos(a);
  }

 private:
  uint64_t key_;
  uint64_t ctr_ = 0;
  double cache_ = 0.0;
  bool have_cache_ = false;
};

}  // namespace wdt
