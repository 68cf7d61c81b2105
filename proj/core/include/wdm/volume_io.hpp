#pragma once

#include <filesystem>
#include <vector>

#include "wdm/volume.hpp"

namespace wdm {

class CoefficientTensor;

/// Resolved file pair of a "v3r" volume: `<base>.v3r.json` header and
/// `<base>.v3r.raw` payload of little-endian f32, W fastest.
struct V3rPaths {
  std::filesystem::path header;
  std::filesystem::path payload;
};

/// Accepts the base name, `<base>.v3r`, or either of the two file names.
V3rPaths v3r_paths(const std::filesystem::path& path);

Volume3 load_volume(const std::filesystem::path& path);
void save_volume(const Volume3& volume, const std::filesystem::path& path);

/// Subband tensors reuse v3r with dims [8*D/2, H/2, W/2] and "subbands": true.
void save_coefficients(const CoefficientTensor& coeffs, const std::filesystem::path& path);
CoefficientTensor load_coefficients(const std::filesystem::path& path);

/// Header paths of all v3r volumes directly inside `dir`, sorted by name.
std::vector<std::filesystem::path> list_volumes(const std::filesystem::path& dir);

}  // namespace wdm
