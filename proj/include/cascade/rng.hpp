#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace cascade {

// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view text, std::uint64_t h = 14695981039346656037ULL) {
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

// Uniform draw in [0, bound) by rejection; identical on every standard library,
// unlike std::uniform_int_distribution.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = kMax - kMax % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace cascade
