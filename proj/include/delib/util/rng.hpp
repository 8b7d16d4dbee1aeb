#pragma once

#include <cstdint>
#include <cmath>

namespace delib {

// splitmix64-seeded xorshift-style generator. Hand-rolled so streams are
// bit-identical across platforms (std distributions are not).
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(splitmix(seed + 0x9e3779b97f4a7c15ULL)) {}

  uint64_t next_u64() {
    uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545F4914F6CDD1DULL;
  }

  // uniform in [0, n)
  uint64_t below(uint64_t n) { return n ? next_u64() % n : 0; }

  // uniform in [0, 1)
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return uniform() < p; }

  double gaussian(double mean, double sigma) {
    // Box-Muller, one sample per call (second discarded for stream simplicity)
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return mean + sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Independent child stream (e.g. per-subsystem from an episode seed).
  Rng fork(uint64_t tag) const { return Rng(splitmix(state_ ^ splitmix(tag))); }

 private:
  static uint64_t splitmix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }
  uint64_t state_;
};

inline uint64_t fnv1a(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace delib
