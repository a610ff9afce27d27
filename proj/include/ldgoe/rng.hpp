#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace ldgoe {

// Counter-based generator: every variate is a pure function of
// (master seed, sample index, entry index), so Monte Carlo runs are
// reproducible for any worker count and sample order.
namespace rng {

inline constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t word(std::uint64_t seed, std::uint64_t sample,
                          std::uint64_t counter) {
  // Distinct splitmix64 position per (sample, counter); counters are
  // limited to 2^32 entries per sample.
  std::uint64_t state = mix64(seed + kGamma) + ((sample << 32) + counter) * kGamma;
  return mix64(state);
}

// Uniform in (0, 1); never returns 0, safe under log().
inline double u01(std::uint64_t seed, std::uint64_t sample,
                  std::uint64_t counter) {
  return static_cast<double>(word(seed, sample, counter) >> 11) * 0x1.0p-53 +
         0x1.0p-54;
}

// Standard normal via Box-Muller, one variate per entry index.
inline double normal(std::uint64_t seed, std::uint64_t sample,
                     std::uint64_t entry) {
  double u1 = u01(seed, sample, 2 * entry);
  double u2 = u01(seed, sample, 2 * entry + 1);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

// Uniform direction on the unit sphere of R^n.
inline std::vector<double> sphere_vector(std::uint64_t seed,
                                         std::uint64_t sample, int n) {
  std::vector<double> v(n);
  double norm2 = 0.0;
  for (int i = 0; i < n; ++i) {
    v[i] = normal(seed, sample, static_cast<std::uint64_t>(i));
    norm2 += v[i] * v[i];
  }
  double inv = 1.0 / std::sqrt(norm2);
  for (auto& c : v) c *= inv;
  return v;
}

}  // namespace rng
}  // namespace ldgoe
