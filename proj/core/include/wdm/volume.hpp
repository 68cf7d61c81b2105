#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace wdm {

/// Extent of a 3D grid in voxels, D-major (D, H, W).
struct Dims3 {
  std::size_t d = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  constexpr std::size_t voxels() const noexcept { return d * h * w; }
  constexpr std::size_t operator[](std::size_t axis) const noexcept {
    return axis == 0 ? d : (axis == 1 ? h : w);
  }
  constexpr bool empty() const noexcept { return voxels() == 0; }
  constexpr bool all_even() const noexcept {
    return d % 2 == 0 && h % 2 == 0 && w % 2 == 0;
  }
  constexpr std::size_t min_extent() const noexcept {
    return d < h ? (d < w ? d : w) : (h < w ? h : w);
  }
  constexpr Dims3 halved() const noexcept { return {d / 2, h / 2, w / 2}; }
  constexpr Dims3 doubled() const noexcept { return {d * 2, h * 2, w * 2}; }

  friend constexpr bool operator==(const Dims3&, const Dims3&) = default;

  /// "DxHxW"
  std::string str() const;
};

/// Physical voxel size in millimeters along (D, H, W).
struct Spacing3 {
  double d = 1.0;
  double h = 1.0;
  double w = 1.0;

  constexpr double operator[](std::size_t axis) const noexcept {
    return axis == 0 ? d : (axis == 1 ? h : w);
  }
  friend constexpr bool operator==(const Spacing3&, const Spacing3&) = default;
};

inline constexpr std::array<const char*, 3> kAxisNames = {"D", "H", "W"};

/// Dense single-channel 3D scalar field with voxel spacing.
///
/// Storage is row-major with W fastest. A default-constructed volume is
/// empty; I/O and preprocessing reject empty volumes. Values are plain
/// copies; every operation returns a new volume.
class Volume3 {
 public:
  Volume3() = default;
  explicit Volume3(Dims3 dims, Spacing3 spacing = {}, float fill = 0.0f);
  /// Throws InvalidArgument if data.size() != dims.voxels() or spacing <= 0.
  Volume3(Dims3 dims, Spacing3 spacing, std::vector<float> data);

  const Dims3& dims() const noexcept { return dims_; }
  const Spacing3& spacing() const noexcept { return spacing_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }

  std::size_t index(std::size_t d, std::size_t h, std::size_t w) const noexcept {
    return (d * dims_.h + h) * dims_.w + w;
  }
  float& at(std::size_t d, std::size_t h, std::size_t w) noexcept {
    return data_[index(d, h, w)];
  }
  float at(std::size_t d, std::size_t h, std::size_t w) const noexcept {
    return data_[index(d, h, w)];
  }

  bool all_finite() const noexcept;

  /// Bitwise comparison of dims, spacing and payload.
  bool bit_equal(const Volume3& other) const noexcept;

 private:
  Dims3 dims_{};
  Spacing3 spacing_{};
  std::vector<float> data_;
};

void validate_spacing(const Spacing3& spacing);

}  // namespace wdm
