#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace wdm {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3").
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// Counter-based generator keyed by (seed, stream). Each draw consumes one
/// Philox block, so the full state is the triple (seed, stream, counter) and
/// two generators with the same triple produce the same variates on any
/// platform and under any thread schedule.
class RngState {
 public:
  explicit RngState(std::uint64_t seed = 0, std::uint64_t stream = 0,
                    std::uint64_t counter = 0) noexcept
      : seed_(seed), stream_(stream), counter_(counter) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t counter() const noexcept { return counter_; }

  /// Independent generator sharing the seed.
  RngState fork(std::uint64_t stream) const noexcept { return RngState(seed_, stream, 0); }

  std::array<std::uint32_t, 4> next_block() noexcept;

  /// Uniform in the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept;
  /// Uniform integer in [0, n); n > 0.
  std::uint64_t uniform_index(std::uint64_t n) noexcept;
  /// Standard normal variate (Box-Muller, one block per call).
  double normal() noexcept;
  /// Fills with standard normals, two per block.
  void fill_normal(std::span<float> out) noexcept;
  void fill_normal(std::span<double> out) noexcept;

  friend bool operator==(const RngState&, const RngState&) = default;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_;
};

}  // namespace wdm
