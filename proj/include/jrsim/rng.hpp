#pragma once

#include <cstdint>
#include <random>

namespace jrsim {

// splitmix64 step; used to derive independent per-index streams from one
// master seed so results do not depend on thread scheduling.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::mt19937_64 stream_for(std::uint64_t master_seed, std::uint64_t index) {
  std::uint64_t s = master_seed;
  std::uint64_t a = splitmix64(s);
  s = a ^ (index * 0x9e3779b97f4a7c15ull + 0x7f4a7c15ull);
  std::uint64_t b = splitmix64(s);
  return std::mt19937_64(b);
}

}  // namespace jrsim
