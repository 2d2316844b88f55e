#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace cmrf {

// SplitMix64: tiny counter-based generator used both directly and to key
// independent sub-streams. Stream layout is versioned (kStreamVersion) so
// generated models stay byte-stable across releases.
inline constexpr std::uint64_t kStreamVersion = 1;

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53-bit resolution.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    // Rejection-free modulo is fine here; n is tiny compared to 2^64.
    return next() % n;
  }

 private:
  std::uint64_t state_;
};

// Deterministically mixes a (seed, tag, a, b) key into a fresh stream seed.
// Draws keyed per entity never shift when unrelated entities are added.
inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t tag,
                                std::uint64_t a = 0, std::uint64_t b = 0) {
  SplitMix64 mix(seed ^ (kStreamVersion * 0x9e3779b97f4a7c15ULL));
  std::uint64_t h = mix.next();
  h ^= SplitMix64(tag + 0x632be59bd9b4e019ULL).next();
  h ^= SplitMix64(a + 0x2545f4914f6cdd1dULL).next() * 3;
  h ^= SplitMix64(b + 0x94d049bb133111ebULL).next() * 7;
  return h;
}

// One sample from a symmetric Dirichlet(1) (uniform on the simplex),
// via normalized exponentials.
inline std::vector<double> dirichlet_uniform(SplitMix64& rng, int k) {
  std::vector<double> p(k);
  double s = 0.0;
  for (int i = 0; i < k; ++i) {
    double u = rng.next_double();
    // -log U ~ Exp(1); clamp away from 0 to avoid -log(0).
    p[i] = -std::log(u > 0.0 ? u : 1e-300);
    s += p[i];
  }
  for (double& v : p) v /= s;
  return p;
}

}  // namespace cmrf
