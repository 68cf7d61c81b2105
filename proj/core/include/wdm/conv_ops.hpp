#pragma once

// Differentiable building blocks of the denoising network. Every backward
// function accumulates (+=) into the gradient buffers it is handed, so
// residual branches and batch elements can share one buffer.

#include <cstddef>
#include <span>
#include <vector>

#include "wdm/feature_map.hpp"

namespace wdm::nn {

/// 3x3x3 convolution with unit zero padding (spatial dims preserved).
/// weight layout [out][in][kd][kh][kw], bias [out].
template <typename T>
FeatureMap<T> conv3d_forward(const FeatureMap<T>& in, std::span<const T> weight,
                             std::span<const T> bias, std::size_t out_channels);

template <typename T>
void conv3d_backward(const FeatureMap<T>& in, const FeatureMap<T>& grad_out,
                     std::span<const T> weight, std::span<T> grad_weight, std::span<T> grad_bias,
                     FeatureMap<T>* grad_in);

/// 1x1x1 convolution (per-voxel channel map); weight layout [out][in].
template <typename T>
FeatureMap<T> pointwise_forward(const FeatureMap<T>& in, std::span<const T> weight,
                                std::span<const T> bias, std::size_t out_channels);

template <typename T>
void pointwise_backward(const FeatureMap<T>& in, const FeatureMap<T>& grad_out,
                        std::span<const T> weight, std::span<T> grad_weight,
                        std::span<T> grad_bias, FeatureMap<T>* grad_in);

/// y = W x + b with W [rows][cols].
template <typename T>
std::vector<T> linear_forward(std::span<const T> x, std::span<const T> weight,
                              std::span<const T> bias, std::size_t rows);

template <typename T>
FeatureMap<T> silu(const FeatureMap<T>& x);

/// grad_in += grad_out * silu'(x)
template <typename T>
void silu_backward(const FeatureMap<T>& x, const FeatureMap<T>& grad_out, FeatureMap<T>& grad_in);

/// Sinusoidal timestep embedding: entries (2k, 2k+1) hold (sin, cos) of
/// t * 10000^(-k / (dim/2 - 1)), so frequencies run geometrically from 1
/// down to 1e-4. dim must be even and positive, t >= 1.
template <typename T>
std::vector<T> timestep_embedding(int t, std::size_t dim);

}  // namespace wdm::nn
