#include "wdm/tiny_conv_net.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wdm/conv_ops.hpp"
#include "wdm/error.hpp"
#include "wdm/wavelet.hpp"

namespace wdm {

namespace {

constexpr std::size_t kCoeffChannels = 8;

std::string join(std::string_view prefix, std::string_view leaf) {
  return std::string(prefix) + "." + std::string(leaf);
}

template <typename T>
void add_into(FeatureMap<T>& dst, const FeatureMap<T>& src) {
  auto d = dst.data();
  auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

template <typename T>
FeatureMap<T> lowpass_channel(const FeatureMap<T>& x) {
  const auto src = x.channel(0);
  return FeatureMap<T>(1, x.dims(), std::vector<T>(src.begin(), src.end()));
}

}  // namespace

std::size_t ParamEntry::size() const noexcept {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

ParamLayout::ParamLayout(const NetConfig& config) {
  const std::size_t c = config.base_channels;
  const std::size_t e = config.embed_dim;
  if (c == 0) throw InvalidArgument("base_channels must be positive");
  if (e == 0 || e % 2 != 0) throw InvalidArgument("embed_dim must be even and positive");

  auto add_block = [&](const std::string& p) {
    add(p + ".conv1.weight", {c, c, 3, 3, 3}, c * 27, false);
    add(p + ".conv1.bias", {c}, 0, true);
    add(p + ".temb.weight", {c, e}, e, false);
    add(p + ".temb.bias", {c}, 0, true);
    add(p + ".conv2.weight", {c, c, 3, 3, 3}, c * 27, false);
    add(p + ".conv2.bias", {c}, 0, true);
  };

  add("in.weight", {c, kCoeffChannels}, kCoeffChannels, false);
  add("in.bias", {c}, 0, true);
  add_block("block1");
  if (config.wavelet_variant) {
    add("wav.down.weight", {c, 8 * c}, 8 * c, false);
    add("wav.down.bias", {c}, 0, true);
    add("wav.res.weight", {c, 8}, 8, false);
    add("wav.res.bias", {c}, 0, true);
    add_block("mid");
    add("wav.up.weight", {8 * c, c}, c, true);
    add("wav.up.bias", {8 * c}, 0, true);
  }
  add_block("block2");
  add("out.weight", {kCoeffChannels, c}, c, true);
  add("out.bias", {kCoeffChannels}, 0, true);
}

void ParamLayout::add(std::string name, std::vector<std::size_t> shape, std::size_t fan_in,
                      bool zero_init) {
  ParamEntry entry{std::move(name), total_, std::move(shape), fan_in, zero_init};
  total_ += entry.size();
  entries_.push_back(std::move(entry));
}

const ParamEntry& ParamLayout::find(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e;
  }
  throw InvalidArgument("no parameter named '" + std::string(name) + "'");
}

template <typename T>
TinyConvNet<T>::TinyConvNet(NetConfig config)
    : config_(config), layout_(config), params_(layout_.total(), T(0)) {}

template <typename T>
std::span<T> TinyConvNet<T>::param(std::string_view name) {
  const auto& e = layout_.find(name);
  return std::span<T>(params_).subspan(e.offset, e.size());
}

template <typename T>
std::span<const T> TinyConvNet<T>::param(std::string_view name) const {
  const auto& e = layout_.find(name);
  return std::span<const T>(params_).subspan(e.offset, e.size());
}

template <typename T>
std::span<T> TinyConvNet<T>::grad_slice(std::vector<T>& grads, std::string_view name) const {
  const auto& e = layout_.find(name);
  return std::span<T>(grads).subspan(e.offset, e.size());
}

template <typename T>
void TinyConvNet<T>::init(RngState& rng) {
  for (const auto& e : layout_.entries()) {
    auto slice = std::span<T>(params_).subspan(e.offset, e.size());
    if (e.zero_init) {
      std::fill(slice.begin(), slice.end(), T(0));
      continue;
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(e.fan_in));
    for (T& v : slice) v = static_cast<T>((2.0 * rng.uniform() - 1.0) * bound);
  }
}

template <typename T>
void TinyConvNet<T>::check_input(const FeatureMap<T>& x) const {
  if (x.channels() != kCoeffChannels) {
    throw InvalidArgument("denoiser input needs 8 subband channels, got " + std::to_string(x.channels()));
  }
  const Dims3& d = x.dims();
  for (std::size_t a = 0; a < 3; ++a) {
    if (d[a] < 4) {
      throw InvalidArgument(std::string("spatial dims too small: axis ") + kAxisNames[a] + " is " +
                            std::to_string(d[a]) + ", need >= 4");
    }
    if (config_.wavelet_variant && d[a] % 4 != 0) {
      throw InvalidArgument(std::string("wavelet variant needs spatial dims divisible by 4: axis ") +
                            kAxisNames[a] + " is " + std::to_string(d[a]));
    }
  }
}

template <typename T>
FeatureMap<T> TinyConvNet<T>::block_forward(std::string_view prefix, const FeatureMap<T>& h,
                                            std::span<const T> emb, BlockTape* tape) const {
  const std::size_t c = config_.base_channels;
  const auto temb = nn::linear_forward<T>(emb, param(join(prefix, "temb.weight")),
                                          param(join(prefix, "temb.bias")), c);
  FeatureMap<T> pre = nn::conv3d_forward<T>(h, param(join(prefix, "conv1.weight")),
                                            param(join(prefix, "conv1.bias")), c);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (T& v : pre.channel(ch)) v += temb[ch];
  }
  FeatureMap<T> act = nn::silu(pre);
  FeatureMap<T> out = nn::conv3d_forward<T>(act, param(join(prefix, "conv2.weight")),
                                            param(join(prefix, "conv2.bias")), c);
  add_into(out, h);
  if (tape) {
    tape->input = h;
    tape->pre_activation = std::move(pre);
    tape->activation = std::move(act);
  }
  return out;
}

template <typename T>
FeatureMap<T> TinyConvNet<T>::block_backward(std::string_view prefix, const BlockTape& tape,
                                             std::span<const T> emb, const FeatureMap<T>& grad_out,
                                             std::vector<T>& grads) const {
  const std::size_t c = config_.base_channels;
  FeatureMap<T> grad_act(c, tape.activation.dims());
  nn::conv3d_backward<T>(tape.activation, grad_out, param(join(prefix, "conv2.weight")),
                         grad_slice(grads, join(prefix, "conv2.weight")),
                         grad_slice(grads, join(prefix, "conv2.bias")), &grad_act);
  FeatureMap<T> grad_pre(c, tape.pre_activation.dims());
  nn::silu_backward(tape.pre_activation, grad_act, grad_pre);

  auto gw = grad_slice(grads, join(prefix, "temb.weight"));
  auto gb = grad_slice(grads, join(prefix, "temb.bias"));
  for (std::size_t ch = 0; ch < c; ++ch) {
    T s = 0;
    for (T v : grad_pre.channel(ch)) s += v;
    gb[ch] += s;
    for (std::size_t j = 0; j < emb.size(); ++j) gw[ch * emb.size() + j] += s * emb[j];
  }

  FeatureMap<T> grad_in = grad_out;  // identity skip
  nn::conv3d_backward<T>(tape.input, grad_pre, param(join(prefix, "conv1.weight")),
                         grad_slice(grads, join(prefix, "conv1.weight")),
                         grad_slice(grads, join(prefix, "conv1.bias")), &grad_in);
  return grad_in;
}

template <typename T>
FeatureMap<T> TinyConvNet<T>::forward(const FeatureMap<T>& x, int t, Tape* tape) const {
  check_input(x);
  const std::size_t c = config_.base_channels;
  const auto emb = nn::timestep_embedding<T>(t, config_.embed_dim);

  FeatureMap<T> h = nn::pointwise_forward<T>(x, param("in.weight"), param("in.bias"), c);
  h = block_forward("block1", h, emb, tape ? &tape->block1 : nullptr);

  if (config_.wavelet_variant) {
    FeatureMap<T> down = dwt_downsample(h);
    FeatureMap<T> residual = dwt_downsample(lowpass_channel(x));
    FeatureMap<T> g = nn::pointwise_forward<T>(down, param("wav.down.weight"), param("wav.down.bias"), c);
    add_into(g, nn::pointwise_forward<T>(residual, param("wav.res.weight"), param("wav.res.bias"), c));
    FeatureMap<T> mid_out = block_forward("mid", g, emb, tape ? &tape->mid : nullptr);
    add_into(h, idwt_upsample(nn::pointwise_forward<T>(mid_out, param("wav.up.weight"),
                                                       param("wav.up.bias"), 8 * c)));
    if (tape) {
      tape->down = std::move(down);
      tape->residual = std::move(residual);
      tape->mid_out = std::move(mid_out);
    }
  }

  FeatureMap<T> features = block_forward("block2", h, emb, tape ? &tape->block2 : nullptr);
  FeatureMap<T> out = nn::pointwise_forward<T>(features, param("out.weight"), param("out.bias"), kCoeffChannels);
  if (tape) {
    tape->t = t;
    tape->x = x;
    tape->emb = emb;
    tape->features = std::move(features);
  }
  return out;
}

template <typename T>
typename TinyConvNet<T>::Gradients TinyConvNet<T>::backward(const Tape& tape,
                                                            const FeatureMap<T>& grad_out) const {
  if (grad_out.channels() != kCoeffChannels || grad_out.dims() != tape.x.dims()) {
    throw InvalidArgument("backward: gradient shape does not match the recorded forward pass");
  }
  const std::size_t c = config_.base_channels;
  Gradients g{std::vector<T>(params_.size(), T(0)), FeatureMap<T>(kCoeffChannels, tape.x.dims())};
  const std::span<const T> emb = tape.emb;

  FeatureMap<T> grad_h(c, tape.features.dims());
  nn::pointwise_backward<T>(tape.features, grad_out, param("out.weight"),
                            grad_slice(g.params, "out.weight"), grad_slice(g.params, "out.bias"), &grad_h);
  grad_h = block_backward("block2", tape.block2, emb, grad_h, g.params);

  if (config_.wavelet_variant) {
    // The Haar operators are orthonormal, so each one's adjoint is its inverse.
    const FeatureMap<T> grad_up = dwt_downsample(grad_h);
    FeatureMap<T> grad_mid(c, tape.mid_out.dims());
    nn::pointwise_backward<T>(tape.mid_out, grad_up, param("wav.up.weight"),
                              grad_slice(g.params, "wav.up.weight"), grad_slice(g.params, "wav.up.bias"),
                              &grad_mid);
    const FeatureMap<T> grad_g = block_backward("mid", tape.mid, emb, grad_mid, g.params);

    FeatureMap<T> grad_down(8 * c, tape.down.dims());
    nn::pointwise_backward<T>(tape.down, grad_g, param("wav.down.weight"),
                              grad_slice(g.params, "wav.down.weight"),
                              grad_slice(g.params, "wav.down.bias"), &grad_down);
    FeatureMap<T> grad_res(kCoeffChannels, tape.residual.dims());
    nn::pointwise_backward<T>(tape.residual, grad_g, param("wav.res.weight"),
                              grad_slice(g.params, "wav.res.weight"), grad_slice(g.params, "wav.res.bias"),
                              &grad_res);
    add_into(grad_h, idwt_upsample(grad_down));
    const FeatureMap<T> grad_lll = idwt_upsample(grad_res);
    auto dst = g.input.channel(0);
    const auto src = grad_lll.channel(0);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }

  grad_h = block_backward("block1", tape.block1, emb, grad_h, g.params);
  nn::pointwise_backward<T>(tape.x, grad_h, param("in.weight"), grad_slice(g.params, "in.weight"),
                            grad_slice(g.params, "in.bias"), &g.input);
  return g;
}

template class TinyConvNet<float>;
template class TinyConvNet<double>;

}  // namespace wdm
