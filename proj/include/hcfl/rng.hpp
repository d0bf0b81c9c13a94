#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace hcfl {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Order-sensitive seed derivation from a list of tags, e.g.
/// derive_seed({global, round, agent, purpose}).
constexpr std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts)
{
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (auto p : parts)
    h = mix64(h ^ mix64(p));
  return h;
}

/// Purpose tags so independent draws never share a stream.
enum class Stream : std::uint64_t
{
  Valuation = 1,
  Lie       = 2,
  Interests = 3,
  Target    = 4,
  Training  = 5,
  Payment   = 6,
  Salt      = 7,
  Instance  = 8,
};

using RngStream = std::mt19937_64;

inline RngStream make_stream(std::initializer_list<std::uint64_t> parts)
{
  return RngStream{derive_seed(parts)};
}

/// Uniform integer on the closed interval [lo, hi].
inline std::int64_t uniform_int(RngStream& rng, std::int64_t lo, std::int64_t hi)
{
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

}  // namespace hcfl
