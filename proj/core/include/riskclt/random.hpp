#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace riskclt {

/// SplitMix64 step (Steele, Lea, Flood 2014 constants). Used to expand seeds
/// and to derive substream keys.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// xoshiro256** 1.0 (Blackman & Vigna). Satisfies UniformRandomBitGenerator,
/// so it plugs into <random> distributions.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Advances the state by 2^128 draws.
  void jump() noexcept;

 private:
  std::array<std::uint64_t, 4> s_;
};

/// Deterministic seed for an independent substream identified by
/// (master, a, b), e.g. (master seed, sample size, replicate index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) noexcept;

}  // namespace riskclt
