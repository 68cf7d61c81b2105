#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wdm/volume.hpp"

namespace wdm {

/// Nearest-rank percentile of the voxel values: the value at rank
/// ceil(pct/100 * N) of the ascending order, rank clamped to [1, N].
float nearest_rank_percentile(const Volume3& volume, double pct);

/// Clamps every voxel into [P_lower, P_upper] (nearest-rank). Requires
/// 0 <= lower_pct < upper_pct <= 100.
Volume3 clip_percentiles(const Volume3& volume, double lower_pct, double upper_pct);

/// output = max(input, floor).
Volume3 clip_floor(const Volume3& volume, double floor);

/// Trilinear resampling to isotropic `target_spacing` mm.
///
/// Output dims are round(n * s / t) per axis (at least 1). Voxel centres sit
/// at (i + 0.5) * spacing from the grid corner; sample positions outside the
/// input centre lattice clamp to the boundary.
Volume3 resample_isotropic(const Volume3& volume, double target_spacing);

/// Centres the input in a zero-filled grid of `target` dims. Offsets are
/// floor((target - dims) / 2).
Volume3 zero_pad_to(const Volume3& volume, Dims3 target);

/// Extracts the centred `target` sub-box with offset floor((dims - target) / 2).
Volume3 center_crop(const Volume3& volume, Dims3 target);

/// Per axis: crop if larger than target, zero-pad if smaller.
Volume3 pad_or_crop_to(const Volume3& volume, Dims3 target);

/// Affine map of [min, max] onto [lo, hi]; a constant input maps to (lo + hi) / 2.
Volume3 normalize_to_range(const Volume3& volume, double lo, double hi);

/// 2x2x2 mean pooling; requires even dims, doubles the spacing.
Volume3 avg_pool2(const Volume3& volume);

struct PreprocessRecipe {
  std::optional<double> clip_floor;
  std::optional<double> clip_lower_pct;
  std::optional<double> clip_upper_pct;
  std::optional<double> resample_spacing;
  std::optional<Dims3> pad_or_crop_target;
  std::optional<std::pair<double, double>> normalize_range;
  unsigned downsample_halvings = 0;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

/// "brats": percentile clip (0.1, 99.9), zero-pad to 256^3, normalize [-1, 1].
/// "lidc": floor-clip at -1000, upper percentile clip 99.9, resample to 1 mm,
/// centre-crop to 256^3, normalize [-1, 1].
/// "none": identity.
PreprocessRecipe recipe_preset(std::string_view name);
std::vector<std::string> recipe_preset_names();

/// Applies, in order: floor clip, percentile clip, resample, pad-or-crop,
/// normalize, then `downsample_halvings` rounds of avg_pool2.
Volume3 apply_recipe(const Volume3& volume, const PreprocessRecipe& recipe);

}  // namespace wdm
