#include "bellaudit/rng.hpp"

namespace bellaudit::numeric {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

constexpr std::uint64_t kStreamSalt = 0xD1B54A32D192ED03ULL;

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) {
  std::uint64_t a = seed;
  std::uint64_t b = stream_id ^ kStreamSalt;
  state_[0] = splitmix64(a);
  state_[1] = splitmix64(a);
  state_[2] = splitmix64(b);
  state_[3] = splitmix64(b);
}

std::uint64_t RngStream::next() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t RngStream::below(std::uint64_t bound) {
  unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

RngStream rng_stream(std::uint64_t seed, std::uint64_t stream_id) { return {seed, stream_id}; }

}  // namespace bellaudit::numeric
