#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace lmo {

/// SplitMix64 finalizer; used to fold stream keys into engine seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t stream_key(std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t p : parts) h = mix64(h ^ mix64(p));
  return h;
}

/// Engine for one (seed, a, b, ...) key. Streams with distinct keys are
/// independent and no state is shared between them.
inline std::mt19937_64 keyed_engine(std::initializer_list<std::uint64_t> parts) {
  return std::mt19937_64(stream_key(parts));
}

}  // namespace lmo
