#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string_view>

#include "wdm/feature_map.hpp"
#include "wdm/volume.hpp"

namespace wdm {

/// Orthonormal Haar analysis pair. Low = (1, 1)/sqrt2, high = (-1, 1)/sqrt2,
/// applied to the sample pair (2k, 2k+1).
struct HaarFilters {
  static constexpr double kInvSqrt2 = 0.70710678118654752440;
  static constexpr std::array<double, 2> low{kInvSqrt2, kInvSqrt2};
  static constexpr std::array<double, 2> high{-kInvSqrt2, kInvSqrt2};
};

/// Subband channel order. Letters name the filter per axis in (D, H, W)
/// order, so the index is 4*high_D + 2*high_H + high_W.
enum class Subband : std::size_t { lll = 0, llh, lhl, lhh, hll, hlh, hhl, hhh };

inline constexpr std::size_t kSubbands = 8;
std::string_view subband_name(Subband s) noexcept;

/// The 8 stacked Haar subbands of a volume at half resolution; the state
/// space the diffusion model operates on. Channel 0 is lll.
class CoefficientTensor {
 public:
  CoefficientTensor() = default;
  explicit CoefficientTensor(Dims3 half_dims, float fill = 0.0f);
  /// Throws unless `map` has exactly 8 channels.
  explicit CoefficientTensor(FeatureMap<float> map);

  const Dims3& half_dims() const noexcept { return map_.dims(); }
  Dims3 volume_dims() const noexcept { return map_.dims().doubled(); }
  std::size_t size() const noexcept { return map_.size(); }

  std::span<float> data() noexcept { return map_.data(); }
  std::span<const float> data() const noexcept { return map_.data(); }
  std::span<float> subband(Subband s) noexcept { return map_.channel(static_cast<std::size_t>(s)); }
  std::span<const float> subband(Subband s) const noexcept {
    return map_.channel(static_cast<std::size_t>(s));
  }

  const FeatureMap<float>& map() const noexcept { return map_; }
  FeatureMap<float>& map() noexcept { return map_; }

  bool same_shape(const CoefficientTensor& other) const noexcept {
    return map_.same_shape(other.map_);
  }
  bool all_finite() const noexcept;
  bool bit_equal(const CoefficientTensor& other) const noexcept;

 private:
  FeatureMap<float> map_;
};

/// Single-level 3D Haar analysis. All dims must be even and >= 2.
CoefficientTensor dwt3(const Volume3& volume);

/// Exact inverse of dwt3; output dims are twice the half dims.
Volume3 idwt3(const CoefficientTensor& coeffs, Spacing3 spacing = {});

/// Per-channel dwt3: c channels at full resolution -> 8c channels at half
/// resolution, channel 8*c + s holding subband s of input channel c.
template <typename T>
FeatureMap<T> dwt_downsample(const FeatureMap<T>& features);

/// Inverse of dwt_downsample; channel count must be a multiple of 8.
template <typename T>
FeatureMap<T> idwt_upsample(const FeatureMap<T>& features);

namespace detail {

/// Kernel for one channel: `in` has `dims` (all even), `out` holds 8
/// consecutive half-resolution planes in subband order.
template <typename T>
void haar_analysis(std::span<const T> in, Dims3 dims, std::span<T> out);

/// Inverse kernel; `in` holds 8 subband planes of `half` dims.
template <typename T>
void haar_synthesis(std::span<const T> in, Dims3 half, std::span<T> out);

}  // namespace detail

}  // namespace wdm
