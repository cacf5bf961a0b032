#pragma once

#include <cstdint>
#include <string_view>

namespace adgraph {

/// SplitMix64 finalizer; the mixing step used for every seeded hash.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xCBF29CE484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

constexpr std::uint64_t fnv1a64(std::u32string_view cps, std::uint64_t h = 0xCBF29CE484222325ULL) {
  for (char32_t cp : cps) {
    for (int shift = 0; shift < 32; shift += 8) {
      h ^= (static_cast<std::uint64_t>(cp) >> shift) & 0xFF;
      h *= 0x100000001B3ULL;
    }
  }
  return h;
}

}  // namespace adgraph
