#include "wdm/rng.hpp"

#include <cmath>
#include <numbers>

namespace wdm {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// 53-bit uniform strictly inside (0, 1).
inline double to_unit(std::uint32_t a, std::uint32_t b) noexcept {
  const std::uint64_t bits = (static_cast<std::uint64_t>(a >> 5) << 26) | (b >> 6);
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

template <typename T>
void fill_pairs(RngState& rng, std::span<T> out) noexcept {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::size_t i = 0;
  while (i < out.size()) {
    const auto blk = rng.next_block();
    const double r = std::sqrt(-2.0 * std::log(to_unit(blk[0], blk[1])));
    const double theta = two_pi * to_unit(blk[2], blk[3]);
    out[i++] = static_cast<T>(r * std::cos(theta));
    if (i < out.size()) out[i++] = static_cast<T>(r * std::sin(theta));
  }
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

std::array<std::uint32_t, 4> RngState::next_block() noexcept {
  const std::array<std::uint32_t, 4> ctr{
      static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
      static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_),
                                         static_cast<std::uint32_t>(seed_ >> 32)};
  ++counter_;
  return philox4x32_10(ctr, key);
}

double RngState::uniform() noexcept {
  const auto blk = next_block();
  return to_unit(blk[0], blk[1]);
}

std::uint64_t RngState::uniform_index(std::uint64_t n) noexcept {
  const auto k = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
  return k < n ? k : n - 1;
}

double RngState::normal() noexcept {
  double z;
  fill_pairs<double>(*this, std::span<double>(&z, 1));
  return z;
}

void RngState::fill_normal(std::span<float> out) noexcept { fill_pairs<float>(*this, out); }
void RngState::fill_normal(std::span<double> out) noexcept { fill_pairs<double>(*this, out); }

}  // namespace wdm
