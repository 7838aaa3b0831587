#pragma once

#include <cstdint>

namespace dn {

// Counter-based deterministic RNG: any (seed, purpose, pixel, draw) cell can
// be evaluated in isolation, so parallel generation is order-free and
// bit-identical to serial generation.

enum class RngPurpose : uint64_t {
  Substitute = 1,   // corruption substitution mask
  DepthNoise = 2,   // corrupted depth values
  NormalNoise = 3,  // corrupted normal values
  Jitter = 4,       // per-pixel color texture (seedless: fixed seed 0)
  Sparsify = 5,     // sparse keep mask
  PatternSample = 6 // random-window neighborhood sampling
};

// splitmix64 finalizer
inline constexpr uint64_t hash64(uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

inline constexpr uint64_t rng_u64(uint64_t seed, RngPurpose purpose,
                                  uint64_t pixel, uint64_t draw) {
  return hash64(hash64(hash64(hash64(seed) + static_cast<uint64_t>(purpose)) +
                       pixel) +
                draw);
}

// Uniform double in [0, 1) with 53 random bits.
inline constexpr double rng_u01(uint64_t seed, RngPurpose purpose,
                                uint64_t pixel, uint64_t draw) {
  return static_cast<double>(rng_u64(seed, purpose, pixel, draw) >> 11) *
         0x1.0p-53;
}

}  // namespace dn
