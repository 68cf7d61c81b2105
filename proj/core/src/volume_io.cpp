#include "wdm/volume_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "binary_io.hpp"
#include "wdm/error.hpp"
#include "wdm/wavelet.hpp"

namespace wdm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kMagic = "v3r1";
constexpr std::string_view kDtype = "f32le";

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct Header {
  Dims3 dims;
  Spacing3 spacing;
  bool subbands = false;
};

void write_header(const fs::path& path, const Header& h) {
  json j;
  j["magic"] = kMagic;
  j["dims"] = {h.dims.d, h.dims.h, h.dims.w};
  j["spacing"] = {h.spacing.d, h.spacing.h, h.spacing.w};
  j["dtype"] = kDtype;
  if (h.subbands) j["subbands"] = true;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

Header read_header(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("missing file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("malformed header " + path.string() + ": " + e.what());
  }
  try {
    if (j.at("magic").get<std::string>() != kMagic) {
      throw IoError("bad magic in " + path.string());
    }
    const auto dtype = j.at("dtype").get<std::string>();
    if (dtype != kDtype) throw IoError("unsupported dtype '" + dtype + "' in " + path.string());
    const auto& d = j.at("dims");
    const auto& s = j.at("spacing");
    if (d.size() != 3 || s.size() != 3) throw IoError("dims and spacing need 3 entries");
    Header h;
    h.dims = {d[0].get<std::size_t>(), d[1].get<std::size_t>(), d[2].get<std::size_t>()};
    h.spacing = {s[0].get<double>(), s[1].get<double>(), s[2].get<double>()};
    h.subbands = j.value("subbands", false);
    return h;
  } catch (const json::exception& e) {
    throw IoError("malformed header " + path.string() + ": " + e.what());
  }
}

std::vector<float> read_payload(const fs::path& path, std::size_t expected) {
  auto values = detail::read_f32le(path);
  if (values.size() != expected) {
    throw IoError("payload length mismatch: " + path.string() + " has " +
                  std::to_string(values.size()) + " values, header needs " +
                  std::to_string(expected));
  }
  for (float v : values) {
    if (!std::isfinite(v)) throw IoError("non-finite value (NaN/Inf) in payload " + path.string());
  }
  return values;
}

}  // namespace

V3rPaths v3r_paths(const fs::path& path) {
  std::string base = path.string();
  for (std::string_view suffix : {".v3r.json", ".v3r.raw", ".v3r"}) {
    if (ends_with(base, suffix)) {
      base.resize(base.size() - suffix.size());
      break;
    }
  }
  return {fs::path(base + ".v3r.json"), fs::path(base + ".v3r.raw")};
}

Volume3 load_volume(const fs::path& path) {
  const auto paths = v3r_paths(path);
  const Header h = read_header(paths.header);
  if (h.dims.empty()) throw IoError("empty volume in " + paths.header.string());
  auto values = read_payload(paths.payload, h.dims.voxels());
  try {
    return Volume3(h.dims, h.spacing, std::move(values));
  } catch (const InvalidArgument& e) {
    throw IoError(paths.header.string() + ": " + e.what());
  }
}

void save_volume(const Volume3& volume, const fs::path& path) {
  if (volume.empty() || volume.dims().empty()) throw InvalidArgument("empty volume");
  if (!volume.all_finite()) throw InvalidArgument("volume contains NaN/Inf; refusing to write");
  const auto paths = v3r_paths(path);
  if (paths.header.has_parent_path()) fs::create_directories(paths.header.parent_path());
  detail::write_f32le(paths.payload, volume.data());
  write_header(paths.header, {volume.dims(), volume.spacing(), false});
}

void save_coefficients(const CoefficientTensor& coeffs, const fs::path& path) {
  if (coeffs.size() == 0) throw InvalidArgument("empty volume");
  if (!coeffs.all_finite()) throw InvalidArgument("coefficients contain NaN/Inf; refusing to write");
  const auto paths = v3r_paths(path);
  if (paths.header.has_parent_path()) fs::create_directories(paths.header.parent_path());
  const Dims3 half = coeffs.half_dims();
  detail::write_f32le(paths.payload, coeffs.data());
  write_header(paths.header, {{kSubbands * half.d, half.h, half.w}, {}, true});
}

CoefficientTensor load_coefficients(const fs::path& path) {
  const auto paths = v3r_paths(path);
  const Header h = read_header(paths.header);
  if (!h.subbands) throw IoError(paths.header.string() + " is not a subband tensor");
  if (h.dims.empty() || h.dims.d % kSubbands != 0) {
    throw IoError(paths.header.string() + ": leading dim must be a positive multiple of 8");
  }
  const Dims3 half{h.dims.d / kSubbands, h.dims.h, h.dims.w};
  auto values = read_payload(paths.payload, h.dims.voxels());
  return CoefficientTensor(FeatureMap<float>(kSubbands, half, std::move(values)));
}

std::vector<fs::path> list_volumes(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && ends_with(entry.path().filename().string(), ".v3r.json")) {
      found.push_back(entry.path());
    }
  }
  std::sort(found.begin(), found.end());
  return found;
}

}  // namespace wdm
