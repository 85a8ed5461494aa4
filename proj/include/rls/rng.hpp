#ifndef RLS_RNG_HPP
#define RLS_RNG_HPP

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace rls {

/// Random stream used by every generator and solver. Streams are never shared
/// between trials; each one is seeded from a derived 64-bit seed.
using Stream = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Hashes a base seed together with a list of coordinates into a new seed.
/// Order matters; the result does not depend on any other stream's state,
/// so trial t of a sweep can be reproduced in isolation.
inline constexpr std::uint64_t derive_seed(std::uint64_t base,
                                           std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = splitmix64(base);
  for (auto k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

inline std::uint64_t seed_key(double v) noexcept { return std::bit_cast<std::uint64_t>(v); }

inline Stream make_stream(std::uint64_t seed) { return Stream(seed); }

/// Fair +1/-1 from the top bit of one draw.
inline int random_sign(Stream& rng) { return (rng() >> 63) ? 1 : -1; }

}  // namespace rls

#endif
