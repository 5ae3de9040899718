#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pushsum {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to decorrelate derived seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_label(std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Independent stream for (seed, trial, label, index). Streams never depend on
/// the order in which trials or nodes are processed.
inline Rng make_stream(std::uint64_t seed, std::uint64_t trial, std::string_view label,
                       std::uint64_t index = 0) {
  std::uint64_t s = mix64(seed);
  s = mix64(s ^ mix64(trial + 0x51ed27ULL));
  s = mix64(s ^ hash_label(label));
  s = mix64(s ^ mix64(index + 0x2545f491ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(index)};
  return Rng(seq);
}

}  // namespace pushsum
