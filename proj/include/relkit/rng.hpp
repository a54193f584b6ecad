#pragma once

#include <cstdint>
#include <random>

namespace relkit {

/// Unbiased draw in [0, n). Rejection sampling on the raw mt19937_64 stream,
/// so results are identical across platforms (std::uniform_int_distribution
/// is implementation-defined and would not be).
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  if (n == 0) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace relkit
