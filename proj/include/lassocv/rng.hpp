#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace lassocv {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream key derived from a parent key and a counter.
constexpr std::uint64_t child_seed(std::uint64_t parent, std::uint64_t counter) {
  return mix64(mix64(parent) ^ mix64(counter + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace lassocv
