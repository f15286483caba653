#pragma once

#include <cstdint>
#include <limits>

namespace hsketch {

/// SplitMix64 generator. Every random quantity in the library is drawn from
/// one of these, so a (seed, trial) pair pins the exact sample on any
/// platform.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += kGolden);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, bound) by Lemire's multiply-shift with rejection.
  std::uint64_t bounded(std::uint64_t bound) noexcept {
    if (bound <= 1) return 0;
    unsigned __int128 prod = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(prod);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        prod = static_cast<unsigned __int128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(prod);
      }
    }
    return static_cast<std::uint64_t>(prod >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  std::uint64_t state() const noexcept { return state_; }

  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

 private:
  std::uint64_t state_;
};

/// Golden-ratio mix of a trial index: the first SplitMix64 output from
/// state t, i.e. the SplitMix64 finalizer applied to t + golden.
inline std::uint64_t golden_ratio_mix(std::uint64_t t) noexcept { return SplitMix64(t)(); }

/// Stream for trial `t` of an experiment seeded with `seed`:
/// SplitMix64(seed XOR golden_ratio_mix(t)). The finalizer matters: a plain
/// seed XOR t * golden would make trial t replay trial 0 shifted by t draws.
inline SplitMix64 trial_stream(std::uint64_t seed, std::uint64_t trial) noexcept {
  return SplitMix64(seed ^ golden_ratio_mix(trial));
}

}  // namespace hsketch
