#pragma once

#include "wdm/rng.hpp"
#include "wdm/volume.hpp"

namespace wdm {

/// Sum of 1 to 3 random ellipsoids with a smooth (logistic) boundary falloff
/// over a faint background. Values lie in [0, 1]; the draw is a pure function
/// of the rng state.
Volume3 make_ellipsoid_volume(const Dims3& dims, RngState& rng, const Spacing3& spacing = {});

}  // namespace wdm
