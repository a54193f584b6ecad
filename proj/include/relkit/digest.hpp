#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace relkit {

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t state = kFnvOffset) {
  for (unsigned char c : data) {
    state ^= static_cast<std::uint64_t>(c);
    state *= kFnvPrime;
  }
  return state;
}

inline std::uint64_t fnv1a64(std::uint64_t value, std::uint64_t state = kFnvOffset) {
  for (int i = 0; i < 8; ++i) {
    state ^= (value >> (8 * i)) & 0xffULL;
    state *= kFnvPrime;
  }
  return state;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

/// Stable 16-hex-char digest of a text body; the default text_key.
inline std::string content_digest(std::string_view body) { return hex64(fnv1a64(body)); }

/// Deterministic seed derivation: fold string parts into a base seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view part) {
  return fnv1a64(part, fnv1a64(seed));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view part, std::uint64_t extra) {
  return fnv1a64(extra, fnv1a64(part, fnv1a64(seed)));
}

}  // namespace relkit
