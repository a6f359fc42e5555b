#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace bellaudit::numeric {

// SplitMix64 step; used for seeding only.
std::uint64_t splitmix64(std::uint64_t& state);

// xoshiro256** stream keyed by (seed, stream_id).
//
// State derivation: a SplitMix64 sequence started at `seed` yields s[0], s[1];
// a second sequence started at `stream_id ^ 0xD1B54A32D192ED03` yields s[2],
// s[3]. The 128-bit key maps injectively into the 256-bit state, so distinct
// (seed, stream_id) pairs never share a state. Outputs are the reference
// xoshiro256** sequence for that state.
//
// Value type; copying a stream forks it. Satisfies UniformRandomBitGenerator
// but callers should use the helpers below rather than <random> distributions
// so results do not depend on the standard library implementation.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next(); }
  std::uint64_t next();

  // Uniform in [0, 1) with 53 random bits.
  double uniform();

  // Uniform integer in [0, bound); bound > 0. Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound);

  bool bernoulli(double p) { return uniform() < p; }

  const std::array<std::uint64_t, 4>& state() const { return state_; }

 private:
  std::array<std::uint64_t, 4> state_;
};

RngStream rng_stream(std::uint64_t seed, std::uint64_t stream_id);

}  // namespace bellaudit::numeric
