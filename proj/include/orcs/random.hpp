#pragma once

#include <cstdint>
#include <limits>

namespace orcs {

/// SplitMix64: the state advances by a fixed odd increment (a counter) and
/// each output is a bijective mix of the new state. Satisfies
/// UniformRandomBitGenerator so it can drive <random> distributions.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  static constexpr std::uint64_t kIncrement = 0x9E3779B97F4A7C15ULL;

  constexpr explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    state_ += kIncrement;
    return mix(state_);
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Independent generator for sub-stream `stream` of a base seed.
  static constexpr SplitMix64 substream(std::uint64_t seed, std::uint64_t stream) noexcept {
    return SplitMix64(mix(seed ^ mix(stream * kIncrement + 1)));
  }

  constexpr std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(SplitMix64& gen) noexcept {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace orcs
