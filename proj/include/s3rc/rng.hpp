#pragma once

#include <cstdint>
#include <cmath>

namespace s3rc::rng {

// Counter-based random stream: value(seed, stream, ctr) is a pure function,
// so generation order never affects the output and parallel evaluation is
// reproducible.  Mixing is the SplitMix64 finalizer.
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t at(uint64_t seed, uint64_t stream, uint64_t ctr) {
  return mix64(mix64(seed ^ mix64(stream)) + ctr);
}

// Uniform in [0, 1), 53-bit resolution.
inline double uniform(uint64_t seed, uint64_t stream, uint64_t ctr) {
  return static_cast<double>(at(seed, stream, ctr) >> 11) * 0x1.0p-53;
}

// Uniform in [-1, 1).
inline double uniform_pm(uint64_t seed, uint64_t stream, uint64_t ctr) {
  return 2.0 * uniform(seed, stream, ctr) - 1.0;
}

// Uniform integer in [0, n).  n must be positive; modulo bias is irrelevant
// at the sizes used here.
inline uint64_t below(uint64_t seed, uint64_t stream, uint64_t ctr, uint64_t n) {
  return at(seed, stream, ctr) % n;
}

// Standard normal via Box-Muller; consumes counters 2*ctr and 2*ctr+1 of the
// given stream, so a stream used for gaussians must not also serve uniforms.
inline double gaussian(uint64_t seed, uint64_t stream, uint64_t ctr) {
  const double u1 = uniform(seed, stream, 2 * ctr);
  const double u2 = uniform(seed, stream, 2 * ctr + 1);
  const double r = std::sqrt(-2.0 * std::log1p(-u1));
  return r * std::cos(2.0 * M_PI * u2);
}

}  // namespace s3rc::rng
