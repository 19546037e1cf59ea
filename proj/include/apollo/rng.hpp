#pragma once

#include <cstdint>
#include <random>

namespace apollo {

// Seeds are part of the external contract: instances, augmentations and
// experiments must be reproducible from (algorithm name, seed) alone. The
// engine is std::mt19937_64, which the C++ standard pins bit-for-bit. The
// standard does NOT pin the distribution adaptors, so everything below draws
// through hand-rolled helpers instead of <random> distributions.

/// SplitMix64 step; used to derive independent child seeds from a base seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Child seed for stream `index` of a base seed (instance workers, oracle
/// redraws per iteration, ...). Stateless: same inputs, same output.
inline std::uint64_t deriveSeed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t s = base ^ (0x2545f4914f6cdd1dULL * (index + 1));
  return splitmix64(s);
}

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) using the top 53 bits of one engine draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniformReal(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Unbiased uniform integer in [0, n) via masked rejection. n must be > 0.
inline std::uint64_t uniformIndex(Rng& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  std::uint64_t mask = ~0ULL >> __builtin_clzll(n - 1 | 1);
  for (;;) {
    std::uint64_t v = rng() & mask;
    if (v < n) return v;
  }
}

/// Uniform integer in [lo, hi] inclusive.
inline std::int64_t uniformInt(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(uniformIndex(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

/// Bernoulli draw with success probability p.
inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

}  // namespace apollo
