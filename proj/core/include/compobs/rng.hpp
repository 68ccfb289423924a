#pragma once

#include <cmath>
#include <cstdint>

namespace compobs {

// Deterministic random numbers with an explicit seeding discipline.
//
// Every random quantity in the library derives from a 64-bit seed through the
// splitmix64 generator (the public-domain finalizer with the golden-gamma
// increment).  The generator is fully specified here so that results can be
// reproduced bit-for-bit by an independent implementation in any language:
//
//   state <- state + 0x9e3779b97f4a7c15
//   z <- state
//   z <- (z xor (z >> 30)) * 0xbf58476d1ce4e5b9
//   z <- (z xor (z >> 27)) * 0x94d049bb133111eb
//   output <- z xor (z >> 31)
//
// Seeds form a hierarchy: experiment seed -> per-trial seed -> per-block
// stream, each level obtained with derive_seed(parent, index).  Replaying any
// sub-stream therefore needs only the root seed and the index path, and
// distinct index paths give unrelated streams.
//
// Uniform doubles take the top 53 bits of an output word; Gaussians come from
// the Box-Muller transform applied to consecutive uniforms.

inline constexpr std::uint64_t kSeedGamma = 0x9e3779b97f4a7c15ULL;

/// Advances a splitmix64 state and returns the next output word.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += kSeedGamma;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of child stream `index` under `seed`.  One splitmix64 output of a
/// state offset by (index + 1) golden gammas, so derive_seed(s, i) != s for
/// practical purposes and child streams are mutually unrelated.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t state = seed + (index + 1) * kSeedGamma;
  return splitmix64(state);
}

/// A stream of uniform and Gaussian variates from one splitmix64 sequence.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform on [0, 1) with 53 random bits.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal deviate via Box-Muller; the paired value is cached.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // log() needs a strictly positive argument: shift the 53-bit uniform
    // from [0, 1) into (0, 1].
    const double u = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double v = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double theta = kTwoPi * v;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  static constexpr double kTwoPi = 6.283185307179586476925286766559;

  std::uint64_t state_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace compobs
