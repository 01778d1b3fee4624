#pragma once

// Counter-based random streams.
//
// Every random draw in the library comes from a Philox4x32-10 stream
// (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3", SC'11).
// A stream is addressed by (base seed, trial, role):
//
//   key     = { low32(base), high32(base) }
//   counter = { block_lo, block_hi, trial, role }
//
// Each block yields four 32-bit words, consumed in order. Doubles are built
// from two words (high word first) as (u64 >> 11) * 2^-53. Normal deviates
// use the cosine branch of Box-Muller on two consecutive uniforms:
// sqrt(-2 ln(1 - u1)) * cos(2 pi u2).

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace qntk {

enum class StreamRole : std::uint32_t {
  kEnvironment = 0,
  kPolicy = 1,
  kInit = 2,
  kNoise = 3,
  kProbe = 4,
};

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                   std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

class RandomStream {
 public:
  RandomStream(std::uint64_t base_seed, std::uint32_t trial, StreamRole role)
      : key_{static_cast<std::uint32_t>(base_seed), static_cast<std::uint32_t>(base_seed >> 32)},
        trial_(trial),
        role_(static_cast<std::uint32_t>(role)) {}

  std::uint32_t next_u32() {
    if (pos_ == 4) refill();
    return buffer_[pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Uniform integer in [0, n) by rejection (no modulo bias).
  std::uint32_t below(std::uint32_t n) {
    const std::uint32_t limit = static_cast<std::uint32_t>(-n) % n;
    for (;;) {
      const std::uint32_t r = next_u32();
      if (r >= limit) return r % n;
    }
  }

  /// Jump to the start of counter block `block`.
  void seek(std::uint64_t block) {
    block_ = block;
    pos_ = 4;
  }

 private:
  void refill() {
    buffer_ = philox4x32_10({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                             trial_, role_},
                            key_);
    ++block_;
    pos_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t trial_;
  std::uint32_t role_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int pos_ = 4;
};

}  // namespace qntk
