#include "wdm/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "wdm/error.hpp"

namespace wdm {

namespace {

struct Ellipsoid {
  std::array<double, 3> center;
  std::array<double, 3> radius;
  double intensity;
};

}  // namespace

Volume3 make_ellipsoid_volume(const Dims3& dims, RngState& rng, const Spacing3& spacing) {
  if (dims.empty()) throw InvalidArgument("make_ellipsoid_volume: empty dims");
  const std::size_t count = 1 + rng.uniform_index(3);
  std::vector<Ellipsoid> shapes(count);
  for (auto& e : shapes) {
    for (std::size_t a = 0; a < 3; ++a) {
      e.center[a] = 0.25 + 0.5 * rng.uniform();
      e.radius[a] = 0.12 + 0.23 * rng.uniform();
    }
    e.intensity = 0.4 + 0.6 * rng.uniform();
  }
  const double background = 0.05 * rng.uniform();
  // Falloff width in normalised radius units.
  constexpr double kSoftness = 0.08;

  Volume3 out(dims, spacing);
  for (std::size_t z = 0; z < dims.d; ++z) {
    const double pz = (static_cast<double>(z) + 0.5) / static_cast<double>(dims.d);
    for (std::size_t y = 0; y < dims.h; ++y) {
      const double py = (static_cast<double>(y) + 0.5) / static_cast<double>(dims.h);
      for (std::size_t x = 0; x < dims.w; ++x) {
        const double px = (static_cast<double>(x) + 0.5) / static_cast<double>(dims.w);
        double v = background;
        for (const auto& e : shapes) {
          const double dz = (pz - e.center[0]) / e.radius[0];
          const double dy = (py - e.center[1]) / e.radius[1];
          const double dx = (px - e.center[2]) / e.radius[2];
          const double r = std::sqrt(dz * dz + dy * dy + dx * dx);
          v = std::max(v, e.intensity / (1.0 + std::exp((r - 1.0) / kSoftness)));
        }
        out.at(z, y, x) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return out;
}

}  // namespace wdm
