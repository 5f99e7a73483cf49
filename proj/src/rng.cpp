#include "kf/rng.hpp"

#include <cmath>

namespace kf {
namespace {

constexpr std::uint32_t kMult0 = 0xD2511F53u;
constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(std::array<std::uint32_t, 4>& c,
                       std::uint32_t k0, std::uint32_t k1) {
  const std::uint64_t p0 = std::uint64_t(kMult0) * c[0];
  const std::uint64_t p1 = std::uint64_t(kMult1) * c[2];
  const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
  const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
  c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}

}  // namespace

Philox::Philox(std::uint64_t seed, std::uint64_t stream)
    : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)},
      counter_{0u, 0u, std::uint32_t(stream), std::uint32_t(stream >> 32)},
      buffer_pos_(4),
      gauss_cache_(0.0),
      gauss_cached_(false) {}

std::array<std::uint32_t, 4> Philox::block(
    std::array<std::uint32_t, 4> ctr) const {
  std::uint32_t k0 = key_[0], k1 = key_[1];
  for (int r = 0; r < 10; ++r) {
    round_once(ctr, k0, k1);
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return ctr;
}

void Philox::refill() {
  buffer_ = block(counter_);
  // 64-bit block counter in the low words; streams own the high words.
  if (++counter_[0] == 0u) ++counter_[1];
  buffer_pos_ = 0;
}

std::uint32_t Philox::next_u32() {
  if (buffer_pos_ >= 4) refill();
  return buffer_[buffer_pos_++];
}

std::uint64_t Philox::next_u64() {
  const std::uint64_t lo = next_u32();
  const std::uint64_t hi = next_u32();
  return (hi << 32) | lo;
}

double Philox::next_double() {
  return double(next_u64() >> 11) * 0x1.0p-53;
}

double Philox::next_gaussian() {
  if (gauss_cached_) {
    gauss_cached_ = false;
    return gauss_cache_;
  }
  // Box-Muller; u > 0 guaranteed by flipping the open end of [0,1).
  double u = 1.0 - next_double();
  double v = next_double();
  const double r = std::sqrt(-2.0 * std::log(u));
  const double a = 6.283185307179586476925286766559 * v;
  gauss_cache_ = r * std::sin(a);
  gauss_cached_ = true;
  return r * std::cos(a);
}

std::size_t Philox::next_index(const std::vector<double>& cdf) {
  const double u = next_double();
  std::size_t lo = 0, hi = cdf.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (u < cdf[mid]) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

}  // namespace kf
