#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace wdm {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

/// Moment estimates and step counter for bias-corrected Adam.
struct AdamState {
  AdamConfig config;
  std::vector<float> m;
  std::vector<float> v;
  std::uint64_t step = 0;

  AdamState() = default;
  AdamState(AdamConfig cfg, std::size_t parameter_count)
      : config(cfg), m(parameter_count, 0.0f), v(parameter_count, 0.0f) {}
};

/// One in-place Adam update. Throws NumericError on a non-finite gradient
/// (parameters untouched) and InvalidArgument on size mismatch.
void adam_step(std::span<float> params, std::span<const float> grads, AdamState& state);

}  // namespace wdm
