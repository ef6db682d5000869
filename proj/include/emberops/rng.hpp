#pragma once

#include <cstdint>
#include <random>

namespace emberops {

// All stochastic draws go through a 64-bit Mersenne Twister. Uniforms are
// built from raw bits rather than std::uniform_real_distribution so that
// streams are identical across standard library implementations.
using RngStream = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Order-sensitive combination of two words; used to derive independent
// per-episode and per-purpose seeds from a master seed.
constexpr std::uint64_t hash64(std::uint64_t a, std::uint64_t b) noexcept {
  return splitmix64(splitmix64(a) ^ (b + 0x632BE59BD9B4E019ULL + (a << 6) + (a >> 2)));
}

// [0, 1) with 53 bits of mantissa.
constexpr double unit_from_bits(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double uniform01(RngStream& rng) { return unit_from_bits(rng()); }

// Salts separating the streams derived from one episode seed.
namespace salt {
inline constexpr std::uint64_t kWindBase = 0x57494E44ULL;    // "WIND"
inline constexpr std::uint64_t kWindJitter = 0x4A495454ULL;  // "JITT"
inline constexpr std::uint64_t kFire = 0x46495245ULL;        // "FIRE"
inline constexpr std::uint64_t kPolicy = 0x504F4C49ULL;      // "POLI"
inline constexpr std::uint64_t kBaseline = 0x52414E44ULL;    // "RAND"
inline constexpr std::uint64_t kInit = 0x494E4954ULL;        // "INIT"
inline constexpr std::uint64_t kShuffle = 0x53485546ULL;     // "SHUF"
}  // namespace salt

}  // namespace emberops
