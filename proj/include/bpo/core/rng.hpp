#pragma once

#include <cstdint>
#include <random>

namespace bpo {

using Rng = std::mt19937_64;

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Well-mixed 64-bit key for (seed, a, b). Used to derive independent streams
/// so that results do not depend on which worker simulates which trajectory.
inline constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = detail::splitmix64(seed);
  h = detail::splitmix64(h ^ detail::splitmix64(a + 0x632BE59BD9B4E019ULL));
  h = detail::splitmix64(h ^ detail::splitmix64(b + 0x85157AF5ULL));
  return h;
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return Rng(stream_key(seed, a, b));
}

// Reserved stream tags for non-trajectory randomness.
inline constexpr std::uint64_t kInitStream = ~0ULL;
inline constexpr std::uint64_t kBaselineStream = ~0ULL - 1;
inline constexpr std::uint64_t kEvalStream = ~0ULL - 2;

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace bpo
