#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace kf {

/// Counter-based random generator (Philox-4x32, 10 rounds).
///
/// State is a 128-bit counter plus a 64-bit key; every 128-bit block is an
/// independent pure function of (key, counter), so any number of streams can
/// be drawn from one 64-bit master seed without coordination.  Stream s of
/// seed m is Philox(m, s); the stream index occupies the upper counter words.
/// Results are reproducible bit-for-bit across platforms and thread counts,
/// which the deterministic-rerun guarantees of the library rely on.
class Philox {
 public:
  Philox(std::uint64_t seed, std::uint64_t stream);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random mantissa bits.
  double next_double();

  /// Standard normal via Box-Muller on next_double pairs.
  double next_gaussian();

  /// Index sampled from the distribution whose cumulative weights are `cdf`
  /// (nondecreasing, last entry ~1).  Draws exactly one double.
  std::size_t next_index(const std::vector<double>& cdf);

 private:
  std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr) const;
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> buffer_;
  int buffer_pos_;
  double gauss_cache_;
  bool gauss_cached_;
};

}  // namespace kf
