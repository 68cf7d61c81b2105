#include "wdm/checkpoint.hpp"

#include <fstream>
#include <string>

#include <json.hpp>

#include "binary_io.hpp"
#include "wdm/error.hpp"

namespace wdm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kFormat = "wdm-ckpt1";
constexpr std::string_view kManifestSuffix = ".ckpt.json";

}  // namespace

CheckpointPaths checkpoint_paths(const fs::path& path) {
  std::string base = path.string();
  if (base.size() >= kManifestSuffix.size() &&
      base.compare(base.size() - kManifestSuffix.size(), kManifestSuffix.size(), kManifestSuffix) == 0) {
    base.resize(base.size() - kManifestSuffix.size());
  }
  return {fs::path(base + std::string(kManifestSuffix)), fs::path(base + ".params.raw"),
          fs::path(base + ".adam.raw")};
}

void save_checkpoint(const Checkpoint& ckpt, const fs::path& path) {
  const ParamLayout layout(ckpt.net);
  if (ckpt.parameters.size() != layout.total()) {
    throw InvalidArgument("checkpoint parameter count does not match its architecture");
  }
  if (ckpt.optimizer.m.size() != layout.total() || ckpt.optimizer.v.size() != layout.total()) {
    throw InvalidArgument("checkpoint optimizer moments do not match parameter count");
  }
  const auto paths = checkpoint_paths(path);
  if (paths.manifest.has_parent_path()) fs::create_directories(paths.manifest.parent_path());

  json j;
  j["format"] = kFormat;
  j["architecture"] = {{"base_channels", ckpt.net.base_channels},
                       {"embed_dim", ckpt.net.embed_dim},
                       {"wavelet_variant", ckpt.net.wavelet_variant}};
  j["step"] = ckpt.step;
  j["rng"] = {{"seed", ckpt.rng.seed()}, {"stream", ckpt.rng.stream()}, {"counter", ckpt.rng.counter()}};
  j["schedule"] = {{"timesteps", ckpt.schedule.timesteps},
                   {"beta_start", ckpt.schedule.beta_start},
                   {"beta_end", ckpt.schedule.beta_end}};
  j["volume_dims"] = {ckpt.volume_dims.d, ckpt.volume_dims.h, ckpt.volume_dims.w};
  j["parameter_count"] = layout.total();
  json entries = json::array();
  for (const auto& e : layout.entries()) {
    entries.push_back({{"name", e.name}, {"offset", e.offset}, {"shape", e.shape}});
  }
  j["parameter_layout"] = entries;
  const AdamConfig& oc = ckpt.optimizer.config;
  j["optimizer"] = {{"type", "adam"},
                    {"learning_rate", oc.learning_rate},
                    {"beta1", oc.beta1},
                    {"beta2", oc.beta2},
                    {"epsilon", oc.epsilon},
                    {"step", ckpt.optimizer.step}};
  j["files"] = {{"parameters", paths.parameters.filename().string()},
                {"moments", paths.moments.filename().string()},
                {"dtype", "f32le"}};

  detail::write_f32le(paths.parameters, ckpt.parameters);
  std::vector<float> moments(ckpt.optimizer.m);
  moments.insert(moments.end(), ckpt.optimizer.v.begin(), ckpt.optimizer.v.end());
  detail::write_f32le(paths.moments, moments);

  std::ofstream out(paths.manifest, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + paths.manifest.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + paths.manifest.string());
}

Checkpoint load_checkpoint(const fs::path& path) {
  const auto paths = checkpoint_paths(path);
  std::ifstream in(paths.manifest);
  if (!in) throw IoError("missing file: " + paths.manifest.string());
  Checkpoint ckpt;
  try {
    json j;
    in >> j;
    if (j.at("format").get<std::string>() != kFormat) {
      throw IoError("unrecognised checkpoint format in " + paths.manifest.string());
    }
    const auto& a = j.at("architecture");
    ckpt.net = {a.at("base_channels").get<std::size_t>(), a.at("embed_dim").get<std::size_t>(),
                a.at("wavelet_variant").get<bool>()};
    ckpt.step = j.at("step").get<std::uint64_t>();
    const auto& r = j.at("rng");
    ckpt.rng = RngState(r.at("seed").get<std::uint64_t>(), r.at("stream").get<std::uint64_t>(),
                        r.at("counter").get<std::uint64_t>());
    const auto& s = j.at("schedule");
    ckpt.schedule = {s.at("timesteps").get<int>(), s.at("beta_start").get<double>(),
                     s.at("beta_end").get<double>()};
    const auto& d = j.at("volume_dims");
    ckpt.volume_dims = {d.at(0).get<std::size_t>(), d.at(1).get<std::size_t>(), d.at(2).get<std::size_t>()};
    const auto& o = j.at("optimizer");
    ckpt.optimizer.config = {o.at("learning_rate").get<double>(), o.at("beta1").get<double>(),
                             o.at("beta2").get<double>(), o.at("epsilon").get<double>()};
    ckpt.optimizer.step = o.at("step").get<std::uint64_t>();
    const ParamLayout layout(ckpt.net);
    if (j.at("parameter_count").get<std::size_t>() != layout.total()) {
      throw IoError("checkpoint parameter count disagrees with its architecture");
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed checkpoint manifest " + paths.manifest.string() + ": " + e.what());
  }

  const std::size_t n = ParamLayout(ckpt.net).total();
  ckpt.parameters = detail::read_f32le(paths.parameters);
  if (ckpt.parameters.size() != n) throw IoError("payload length mismatch: " + paths.parameters.string());
  const auto moments = detail::read_f32le(paths.moments);
  if (moments.size() != 2 * n) throw IoError("payload length mismatch: " + paths.moments.string());
  ckpt.optimizer.m.assign(moments.begin(), moments.begin() + static_cast<std::ptrdiff_t>(n));
  ckpt.optimizer.v.assign(moments.begin() + static_cast<std::ptrdiff_t>(n), moments.end());
  return ckpt;
}

TinyConvNet<float> network_from(const Checkpoint& ckpt) {
  TinyConvNet<float> net(ckpt.net);
  if (ckpt.parameters.size() != net.parameter_count()) {
    throw InvalidArgument("checkpoint parameter count does not match its architecture");
  }
  std::copy(ckpt.parameters.begin(), ckpt.parameters.end(), net.params().begin());
  return net;
}

}  // namespace wdm
