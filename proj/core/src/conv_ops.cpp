#include "wdm/conv_ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wdm/error.hpp"

namespace wdm::nn {

namespace {

// Valid output range [begin, end) along an axis of length n for tap offset o,
// i.e. all x with 0 <= x + o < n.
struct Range {
  std::size_t begin;
  std::size_t end;
};

inline Range valid_range(std::size_t n, int o) noexcept {
  const std::size_t b = o < 0 ? static_cast<std::size_t>(-o) : 0;
  const std::size_t e = o > 0 ? (n > static_cast<std::size_t>(o) ? n - static_cast<std::size_t>(o) : 0) : n;
  return {b, std::max(b, e)};
}

inline std::size_t shift(std::size_t x, int o) noexcept {
  return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(x) + o);
}

template <typename T>
void check_conv_shapes(const FeatureMap<T>& in, std::span<const T> weight, std::span<const T> bias,
                       std::size_t out_channels, std::size_t taps) {
  if (weight.size() != out_channels * in.channels() * taps || bias.size() != out_channels) {
    throw InvalidArgument("convolution parameter size mismatch");
  }
}

}  // namespace

template <typename T>
FeatureMap<T> conv3d_forward(const FeatureMap<T>& in, std::span<const T> weight,
                             std::span<const T> bias, std::size_t out_channels) {
  check_conv_shapes(in, weight, bias, out_channels, 27);
  const Dims3 dims = in.dims();
  const std::size_t cin = in.channels();
  FeatureMap<T> out(out_channels, dims);
  for (std::size_t co = 0; co < out_channels; ++co) {
    auto dst = out.channel(co);
    std::fill(dst.begin(), dst.end(), bias[co]);
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const auto src = in.channel(ci);
      const T* wk = weight.data() + (co * cin + ci) * 27;
      for (int kd = 0; kd < 3; ++kd) {
        const Range rd = valid_range(dims.d, kd - 1);
        for (int kh = 0; kh < 3; ++kh) {
          const Range rh = valid_range(dims.h, kh - 1);
          for (int kw = 0; kw < 3; ++kw) {
            const Range rw = valid_range(dims.w, kw - 1);
            const T wv = wk[kd * 9 + kh * 3 + kw];
            if (wv == T(0)) continue;
            for (std::size_t d = rd.begin; d < rd.end; ++d) {
              for (std::size_t h = rh.begin; h < rh.end; ++h) {
                T* o = dst.data() + (d * dims.h + h) * dims.w;
                const T* s = src.data() + (shift(d, kd - 1) * dims.h + shift(h, kh - 1)) * dims.w;
                for (std::size_t w = rw.begin; w < rw.end; ++w) o[w] += wv * s[shift(w, kw - 1)];
              }
            }
          }
        }
      }
    }
  }
  return out;
}

template <typename T>
void conv3d_backward(const FeatureMap<T>& in, const FeatureMap<T>& grad_out,
                     std::span<const T> weight, std::span<T> grad_weight, std::span<T> grad_bias,
                     FeatureMap<T>* grad_in) {
  const std::size_t cout = grad_out.channels();
  check_conv_shapes(in, weight, std::span<const T>(grad_bias), cout, 27);
  if (grad_weight.size() != weight.size() || grad_out.dims() != in.dims()) {
    throw InvalidArgument("conv3d_backward: shape mismatch");
  }
  if (grad_in && !grad_in->same_shape(in)) throw InvalidArgument("conv3d_backward: grad_in shape");
  const Dims3 dims = in.dims();
  const std::size_t cin = in.channels();
  for (std::size_t co = 0; co < cout; ++co) {
    const auto g = grad_out.channel(co);
    T gb = 0;
    for (T v : g) gb += v;
    grad_bias[co] += gb;
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const auto src = in.channel(ci);
      const std::size_t base = (co * cin + ci) * 27;
      for (int kd = 0; kd < 3; ++kd) {
        const Range rd = valid_range(dims.d, kd - 1);
        for (int kh = 0; kh < 3; ++kh) {
          const Range rh = valid_range(dims.h, kh - 1);
          for (int kw = 0; kw < 3; ++kw) {
            const Range rw = valid_range(dims.w, kw - 1);
            const std::size_t k = base + static_cast<std::size_t>(kd * 9 + kh * 3 + kw);
            const T wv = weight[k];
            T acc = 0;
            for (std::size_t d = rd.begin; d < rd.end; ++d) {
              for (std::size_t h = rh.begin; h < rh.end; ++h) {
                const T* go = g.data() + (d * dims.h + h) * dims.w;
                const std::size_t row = (shift(d, kd - 1) * dims.h + shift(h, kh - 1)) * dims.w;
                const T* s = src.data() + row;
                for (std::size_t w = rw.begin; w < rw.end; ++w) acc += go[w] * s[shift(w, kw - 1)];
                if (grad_in && wv != T(0)) {
                  T* gi = grad_in->channel(ci).data() + row;
                  for (std::size_t w = rw.begin; w < rw.end; ++w) gi[shift(w, kw - 1)] += wv * go[w];
                }
              }
            }
            grad_weight[k] += acc;
          }
        }
      }
    }
  }
}

template <typename T>
FeatureMap<T> pointwise_forward(const FeatureMap<T>& in, std::span<const T> weight,
                                std::span<const T> bias, std::size_t out_channels) {
  check_conv_shapes(in, weight, bias, out_channels, 1);
  const std::size_t cin = in.channels();
  const std::size_t n = in.channel_size();
  FeatureMap<T> out(out_channels, in.dims());
  for (std::size_t co = 0; co < out_channels; ++co) {
    auto dst = out.channel(co);
    std::fill(dst.begin(), dst.end(), bias[co]);
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const T wv = weight[co * cin + ci];
      if (wv == T(0)) continue;
      const auto src = in.channel(ci);
      for (std::size_t i = 0; i < n; ++i) dst[i] += wv * src[i];
    }
  }
  return out;
}

template <typename T>
void pointwise_backward(const FeatureMap<T>& in, const FeatureMap<T>& grad_out,
                        std::span<const T> weight, std::span<T> grad_weight,
                        std::span<T> grad_bias, FeatureMap<T>* grad_in) {
  const std::size_t cout = grad_out.channels();
  check_conv_shapes(in, weight, std::span<const T>(grad_bias), cout, 1);
  if (grad_weight.size() != weight.size() || grad_out.dims() != in.dims()) {
    throw InvalidArgument("pointwise_backward: shape mismatch");
  }
  if (grad_in && !grad_in->same_shape(in)) throw InvalidArgument("pointwise_backward: grad_in shape");
  const std::size_t cin = in.channels();
  const std::size_t n = in.channel_size();
  for (std::size_t co = 0; co < cout; ++co) {
    const auto g = grad_out.channel(co);
    T gb = 0;
    for (T v : g) gb += v;
    grad_bias[co] += gb;
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const auto src = in.channel(ci);
      T acc = 0;
      for (std::size_t i = 0; i < n; ++i) acc += g[i] * src[i];
      grad_weight[co * cin + ci] += acc;
      if (grad_in) {
        const T wv = weight[co * cin + ci];
        auto gi = grad_in->channel(ci);
        for (std::size_t i = 0; i < n; ++i) gi[i] += wv * g[i];
      }
    }
  }
}

template <typename T>
std::vector<T> linear_forward(std::span<const T> x, std::span<const T> weight,
                              std::span<const T> bias, std::size_t rows) {
  if (weight.size() != rows * x.size() || bias.size() != rows) {
    throw InvalidArgument("linear_forward: parameter size mismatch");
  }
  std::vector<T> y(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    T acc = bias[r];
    for (std::size_t c = 0; c < x.size(); ++c) acc += weight[r * x.size() + c] * x[c];
    y[r] = acc;
  }
  return y;
}

template <typename T>
FeatureMap<T> silu(const FeatureMap<T>& x) {
  FeatureMap<T> y(x.channels(), x.dims());
  auto src = x.data();
  auto dst = y.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const T v = src[i];
    dst[i] = v / (T(1) + std::exp(-v));
  }
  return y;
}

template <typename T>
void silu_backward(const FeatureMap<T>& x, const FeatureMap<T>& grad_out, FeatureMap<T>& grad_in) {
  if (!x.same_shape(grad_out) || !x.same_shape(grad_in)) {
    throw InvalidArgument("silu_backward: shape mismatch");
  }
  auto src = x.data();
  auto g = grad_out.data();
  auto gi = grad_in.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const T s = T(1) / (T(1) + std::exp(-src[i]));
    gi[i] += g[i] * s * (T(1) + src[i] * (T(1) - s));
  }
}

template <typename T>
std::vector<T> timestep_embedding(int t, std::size_t dim) {
  if (dim == 0 || dim % 2 != 0) throw InvalidArgument("timestep embedding dim must be even and positive");
  if (t < 1) throw InvalidArgument("timestep embedding needs t >= 1");
  const std::size_t half = dim / 2;
  std::vector<T> emb(dim);
  for (std::size_t k = 0; k < half; ++k) {
    const double freq =
        half == 1 ? 1.0
                  : std::exp(-std::log(10000.0) * static_cast<double>(k) / static_cast<double>(half - 1));
    const double arg = static_cast<double>(t) * freq;
    emb[2 * k] = static_cast<T>(std::sin(arg));
    emb[2 * k + 1] = static_cast<T>(std::cos(arg));
  }
  return emb;
}

#define WDM_INSTANTIATE_NN(T)                                                                     \
  template FeatureMap<T> conv3d_forward<T>(const FeatureMap<T>&, std::span<const T>,             \
                                           std::span<const T>, std::size_t);                     \
  template void conv3d_backward<T>(const FeatureMap<T>&, const FeatureMap<T>&, std::span<const T>, \
                                   std::span<T>, std::span<T>, FeatureMap<T>*);                  \
  template FeatureMap<T> pointwise_forward<T>(const FeatureMap<T>&, std::span<const T>,          \
                                              std::span<const T>, std::size_t);                  \
  template void pointwise_backward<T>(const FeatureMap<T>&, const FeatureMap<T>&,                \
                                      std::span<const T>, std::span<T>, std::span<T>,            \
                                      FeatureMap<T>*);                                           \
  template std::vector<T> linear_forward<T>(std::span<const T>, std::span<const T>,              \
                                            std::span<const T>, std::size_t);                    \
  template FeatureMap<T> silu<T>(const FeatureMap<T>&);                                          \
  template void silu_backward<T>(const FeatureMap<T>&, const FeatureMap<T>&, FeatureMap<T>&);    \
  template std::vector<T> timestep_embedding<T>(int, std::size_t);

WDM_INSTANTIATE_NN(float)
WDM_INSTANTIATE_NN(double)

#undef WDM_INSTANTIATE_NN

}  // namespace wdm::nn
