#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace cadet {

// All randomness in the project flows through these helpers so that runs are
// reproducible bit-for-bit: the std distributions are avoided because their
// output sequences are implementation-defined.
using Rng = std::mt19937_64;

inline double uniform_real(Rng& rng, double lo, double hi) {
  // 53-bit mantissa draw in [0, 1).
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

inline int uniform_int(Rng& rng, int lo, int hi) {  // inclusive bounds
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return lo + static_cast<int>(draw % span);
}

inline double normal(Rng& rng, double mean = 0.0, double stddev = 1.0) {
  // Box-Muller without state caching; one draw costs two uniforms.
  double u1 = uniform_real(rng, 0.0, 1.0);
  while (u1 <= 0.0) u1 = uniform_real(rng, 0.0, 1.0);
  const double u2 = uniform_real(rng, 0.0, 1.0);
  const double r = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * r * std::cos(2.0 * 3.14159265358979323846 * u2);
}

template <typename T>
void shuffle_indices(Rng& rng, T& v) {  // Fisher-Yates
  for (std::size_t i = v.size(); i > 1; --i) {
    const int j = uniform_int(rng, 0, static_cast<int>(i) - 1);
    std::swap(v[i - 1], v[static_cast<std::size_t>(j)]);
  }
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Stable stream derivation: one base seed, independent streams per entity.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream + 1));
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace cadet
