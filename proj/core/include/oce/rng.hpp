#pragma once

#include <cstdint>
#include <random>

namespace oce {

/// splitmix64 mixing step; used to derive independent per-column streams from
/// (seed, purpose tag, column) so results do not depend on work scheduling.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::mt19937_64 column_engine(std::uint64_t seed, std::uint64_t tag, int column) {
  return std::mt19937_64(mix64(mix64(seed ^ mix64(tag)) ^ std::uint64_t(column)));
}

} // namespace oce
