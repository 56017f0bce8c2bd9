#pragma once

#include <cstdint>
#include <random>

namespace pphi2 {

// SplitMix64 step; used for seeding and stream derivation only.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Stream-split rule: stream k of master seed s is an mt19937_64 seeded with
// the second SplitMix64 output of state (s XOR k*0xda3e39cb94b95bdb).
// Distinct (seed, stream) pairs give decorrelated engines and every consumer
// (chain, battery check, scan) owns exactly one stream index.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream = 0) {
  std::uint64_t state = seed ^ (stream * 0xda3e39cb94b95bdbull);
  splitmix64(state);
  return std::mt19937_64(splitmix64(state));
}

}  // namespace pphi2
