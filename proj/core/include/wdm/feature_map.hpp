#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "wdm/error.hpp"
#include "wdm/volume.hpp"

namespace wdm {

/// Multi-channel 3D tensor, channel-major then D-major (W fastest).
///
/// Templated on the scalar so the network can run both in 32-bit (training,
/// sampling) and in 64-bit (gradient checks).
template <typename T>
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(std::size_t channels, Dims3 dims, T fill = T(0))
      : channels_(channels), dims_(dims), data_(channels * dims.voxels(), fill) {}
  FeatureMap(std::size_t channels, Dims3 dims, std::vector<T> data)
      : channels_(channels), dims_(dims), data_(std::move(data)) {
    if (data_.size() != channels_ * dims_.voxels()) {
      throw InvalidArgument("feature map data length does not match channels x dims");
    }
  }

  std::size_t channels() const noexcept { return channels_; }
  const Dims3& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t channel_size() const noexcept { return dims_.voxels(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  std::vector<T>& storage() noexcept { return data_; }

  std::span<T> channel(std::size_t c) noexcept {
    return std::span<T>(data_).subspan(c * channel_size(), channel_size());
  }
  std::span<const T> channel(std::size_t c) const noexcept {
    return std::span<const T>(data_).subspan(c * channel_size(), channel_size());
  }

  T& at(std::size_t c, std::size_t d, std::size_t h, std::size_t w) noexcept {
    return data_[((c * dims_.d + d) * dims_.h + h) * dims_.w + w];
  }
  T at(std::size_t c, std::size_t d, std::size_t h, std::size_t w) const noexcept {
    return data_[((c * dims_.d + d) * dims_.h + h) * dims_.w + w];
  }

  bool same_shape(const FeatureMap& other) const noexcept {
    return channels_ == other.channels_ && dims_ == other.dims_;
  }

  template <typename U>
  FeatureMap<U> cast() const {
    return FeatureMap<U>(channels_, dims_, std::vector<U>(data_.begin(), data_.end()));
  }

 private:
  std::size_t channels_ = 0;
  Dims3 dims_{};
  std::vector<T> data_;
};

}  // namespace wdm
