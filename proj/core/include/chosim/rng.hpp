#pragma once

#include <cstdint>
#include <random>

namespace chosim {

using Rng = std::mt19937_64;

/// Independent random streams, one per subsystem. A run derives every
/// generator from (root seed, stream, index...) so that switching a feature
/// on or off never shifts another subsystem's draws.
enum class Stream : std::uint32_t {
  drop = 1,
  shadow = 2,
  fading = 3,
  measurement = 4,
  scheduler = 5,
};

inline Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t a = 0, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(a),
                    static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b),
                    static_cast<std::uint32_t>(b >> 32)};
  return Rng{seq};
}

}  // namespace chosim
