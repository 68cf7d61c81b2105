#include "wdm/volume.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "wdm/error.hpp"

namespace wdm {

std::string Dims3::str() const {
  std::ostringstream os;
  os << d << 'x' << h << 'x' << w;
  return os.str();
}

void validate_spacing(const Spacing3& spacing) {
  for (std::size_t a = 0; a < 3; ++a) {
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a])) {
      throw InvalidArgument(std::string("spacing along ") + kAxisNames[a] +
                            " must be a positive finite number");
    }
  }
}

Volume3::Volume3(Dims3 dims, Spacing3 spacing, float fill)
    : dims_(dims), spacing_(spacing), data_(dims.voxels(), fill) {
  validate_spacing(spacing_);
}

Volume3::Volume3(Dims3 dims, Spacing3 spacing, std::vector<float> data)
    : dims_(dims), spacing_(spacing), data_(std::move(data)) {
  validate_spacing(spacing_);
  if (data_.size() != dims_.voxels()) {
    throw InvalidArgument("payload length mismatch: dims " + dims_.str() + " need " +
                          std::to_string(dims_.voxels()) + " values, got " +
                          std::to_string(data_.size()));
  }
}

bool Volume3::all_finite() const noexcept {
  for (float v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool Volume3::bit_equal(const Volume3& other) const noexcept {
  if (dims_ != other.dims_) return false;
  if (std::memcmp(&spacing_, &other.spacing_, sizeof(Spacing3)) != 0) return false;
  return data_.empty() ||
         std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0;
}

}  // namespace wdm
