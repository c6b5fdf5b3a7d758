#pragma once

#include <cstdint>
#include <random>

namespace forestcl {

// splitmix64 finalizer; used to mix seed components into independent streams.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derive a stream seed from a master seed and up to three tags
// (replicate, census, purpose). Streams with distinct tags are
// effectively independent.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t a = 0,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = mix64(master);
  s = mix64(s ^ (a + 0x1000000001ULL));
  s = mix64(s ^ (b + 0x2000000002ULL));
  s = mix64(s ^ (c + 0x3000000003ULL));
  return s;
}

inline std::mt19937_64 make_rng(std::uint64_t master, std::uint64_t a = 0,
                                std::uint64_t b = 0, std::uint64_t c = 0) {
  return std::mt19937_64(stream_seed(master, a, b, c));
}

}  // namespace forestcl
