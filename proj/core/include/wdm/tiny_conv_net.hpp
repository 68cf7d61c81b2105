#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wdm/feature_map.hpp"
#include "wdm/rng.hpp"

namespace wdm {

/// Architecture of the desk-scale denoiser.
///
///   emb   = sinusoidal(t, embed_dim)
///   h     = in_map(x)                      8 -> C, 1x1x1
///   h     = block1(h, emb)
///   [wavelet variant]
///     g   = down_map(dwt_down(h)) + res_map(dwt_down(lll(x)))   -> C at half res
///     g   = mid(g, emb)
///     h   = h + idwt_up(up_map(g))
///   h     = block2(h, emb)
///   out   = out_map(h)                     C -> 8, 1x1x1
///
/// with block(h, emb) = h + conv2(silu(conv1(h) + temb_proj(emb))).
struct NetConfig {
  std::size_t base_channels = 8;
  std::size_t embed_dim = 32;
  bool wavelet_variant = false;

  static NetConfig desk(bool wavelet_variant = false) { return {8, 32, wavelet_variant}; }
  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

/// One named parameter tensor inside the flat parameter vector.
struct ParamEntry {
  std::string name;
  std::size_t offset = 0;
  std::vector<std::size_t> shape;
  std::size_t fan_in = 0;
  bool zero_init = false;

  std::size_t size() const noexcept;
};

/// Ordered list of parameter tensors; this order is also the checkpoint blob order.
class ParamLayout {
 public:
  explicit ParamLayout(const NetConfig& config);

  const std::vector<ParamEntry>& entries() const noexcept { return entries_; }
  std::size_t total() const noexcept { return total_; }
  const ParamEntry& find(std::string_view name) const;

 private:
  void add(std::string name, std::vector<std::size_t> shape, std::size_t fan_in, bool zero_init);

  std::vector<ParamEntry> entries_;
  std::size_t total_ = 0;
};

template <typename T>
class TinyConvNet {
 public:
  struct BlockTape {
    FeatureMap<T> input;
    FeatureMap<T> pre_activation;
    FeatureMap<T> activation;
  };

  /// Activations recorded by forward() for backward().
  struct Tape {
    int t = 0;
    FeatureMap<T> x;
    std::vector<T> emb;
    BlockTape block1;
    // wavelet variant only
    FeatureMap<T> down;      // dwt_down(block1 output)
    FeatureMap<T> residual;  // dwt_down(lll(x))
    BlockTape mid;
    FeatureMap<T> mid_out;
    BlockTape block2;
    FeatureMap<T> features;  // block2 output
  };

  struct Gradients {
    std::vector<T> params;
    FeatureMap<T> input;
  };

  /// All parameters zero.
  explicit TinyConvNet(NetConfig config);

  const NetConfig& config() const noexcept { return config_; }
  const ParamLayout& layout() const noexcept { return layout_; }
  std::size_t parameter_count() const noexcept { return params_.size(); }

  std::span<T> params() noexcept { return params_; }
  std::span<const T> params() const noexcept { return params_; }
  std::span<T> param(std::string_view name);
  std::span<const T> param(std::string_view name) const;

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases, zero
  /// output map (and zero wavelet up-map) so the initial prediction is 0.
  void init(RngState& rng);

  /// Throws InvalidArgument for a wrong channel count or too-small dims.
  void check_input(const FeatureMap<T>& x) const;

  FeatureMap<T> forward(const FeatureMap<T>& x, int t, Tape* tape = nullptr) const;

  /// Gradients of <grad_out, forward(x, t)> w.r.t. every parameter and x.
  Gradients backward(const Tape& tape, const FeatureMap<T>& grad_out) const;

  template <typename U>
  TinyConvNet<U> cast() const {
    TinyConvNet<U> out(config_);
    auto dst = out.params();
    for (std::size_t i = 0; i < params_.size(); ++i) dst[i] = static_cast<U>(params_[i]);
    return out;
  }

 private:
  FeatureMap<T> block_forward(std::string_view prefix, const FeatureMap<T>& h,
                              std::span<const T> emb, BlockTape* tape) const;
  FeatureMap<T> block_backward(std::string_view prefix, const BlockTape& tape,
                               std::span<const T> emb, const FeatureMap<T>& grad_out,
                               std::vector<T>& grads) const;
  std::span<T> grad_slice(std::vector<T>& grads, std::string_view name) const;

  NetConfig config_;
  ParamLayout layout_;
  std::vector<T> params_;
};

extern template class TinyConvNet<float>;
extern template class TinyConvNet<double>;

}  // namespace wdm
