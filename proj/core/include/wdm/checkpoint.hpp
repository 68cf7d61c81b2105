#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "wdm/optimizer.hpp"
#include "wdm/rng.hpp"
#include "wdm/schedule.hpp"
#include "wdm/tiny_conv_net.hpp"

namespace wdm {

/// Everything needed to resume training bit-exactly or to sample.
///
/// On disk: `<base>.ckpt.json` (manifest: architecture, step, rng state,
/// schedule, parameter layout), `<base>.params.raw` (parameters as
/// little-endian f32 in ParamLayout order) and `<base>.adam.raw` (Adam m
/// then v, same order).
struct Checkpoint {
  NetConfig net;
  std::vector<float> parameters;
  AdamState optimizer;
  std::uint64_t step = 0;
  RngState rng;
  ScheduleSpec schedule;
  Dims3 volume_dims;
};

struct CheckpointPaths {
  std::filesystem::path manifest;
  std::filesystem::path parameters;
  std::filesystem::path moments;
};

/// Accepts the base name or the manifest path.
CheckpointPaths checkpoint_paths(const std::filesystem::path& path);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Rebuilds the network described by a checkpoint.
TinyConvNet<float> network_from(const Checkpoint& ckpt);

}  // namespace wdm
