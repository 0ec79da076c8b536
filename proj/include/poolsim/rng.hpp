#pragma once

// Counter-based random streams.
//
// Every draw in the library comes from a Philox4x32-10 block cipher keyed by
// the run seed, with the 128-bit counter split into
//   (draw index, replica, slot, round)
// so a substream is fully determined by its coordinates and never by the order
// in which workers happen to consume it.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace poolsim {

/// Coordinates of one independent substream.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint32_t round = 0;
  std::uint32_t slot = 0;     // miner index, or one of the reserved slots below
  std::uint32_t replica = 0;
};

namespace slots {
inline constexpr std::uint32_t demand = 0xFFFF'FFFFu;
inline constexpr std::uint32_t others = 0xFFFF'FFFEu;
}  // namespace slots

namespace detail {

inline void philox_round(std::array<std::uint32_t, 4>& ctr,
                         const std::array<std::uint32_t, 2>& key) {
  constexpr std::uint64_t m0 = 0xD2511F53u;
  constexpr std::uint64_t m1 = 0xCD9E8D57u;
  const std::uint64_t p0 = m0 * ctr[0];
  const std::uint64_t p1 = m1 * ctr[2];
  const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const auto lo0 = static_cast<std::uint32_t>(p0);
  const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const auto lo1 = static_cast<std::uint32_t>(p1);
  ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                   std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t w0 = 0x9E3779B9u;
  constexpr std::uint32_t w1 = 0xBB67AE85u;
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      key[0] += w0;
      key[1] += w1;
    }
    philox_round(ctr, key);
  }
  return ctr;
}

}  // namespace detail

/// A single substream. Satisfies UniformRandomBitGenerator, but the library
/// only uses its own transforms (uniform, normal) so results do not depend on
/// the standard library's distribution implementations.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(const StreamKey& key)
      : key_{static_cast<std::uint32_t>(key.seed), static_cast<std::uint32_t>(key.seed >> 32)},
        replica_(key.replica),
        slot_(key.slot),
        round_(key.round) {}

  RngStream(std::uint64_t seed, std::uint32_t round, std::uint32_t slot, std::uint32_t replica)
      : RngStream(StreamKey{seed, round, slot, replica}) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ == 2) refill();
    const std::uint64_t hi = buffer_[2 * pos_];
    const std::uint64_t lo = buffer_[2 * pos_ + 1];
    ++pos_;
    return (hi << 32) | lo;
  }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  void refill() {
    buffer_ = detail::philox4x32_10({block_, replica_, slot_, round_}, key_);
    ++block_;
    pos_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t replica_;
  std::uint32_t slot_;
  std::uint32_t round_;
  std::uint32_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int pos_ = 2;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; used to derive child seeds from coordinates.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return mix64(mix64(mix64(seed) ^ a) ^ b);
}

}  // namespace poolsim
