#include "wdm/wavelet.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "wdm/error.hpp"

namespace wdm {

namespace {

void require_even(const Dims3& dims, const char* what) {
  for (std::size_t a = 0; a < 3; ++a) {
    if (dims[a] == 0 || dims[a] % 2 != 0) {
      throw InvalidArgument(std::string(what) + ": dimension along axis " + kAxisNames[a] +
                            " is " + std::to_string(dims[a]) + "; must be even and >= 2");
    }
  }
}

// One butterfly per axis. (lo, hi) = (a + b, b - a) / sqrt2 and its inverse.
// Intermediates are double; the result is rounded once on store.
inline void analyse_pair(double a, double b, double& lo, double& hi) noexcept {
  constexpr double s = HaarFilters::kInvSqrt2;
  lo = (a + b) * s;
  hi = (b - a) * s;
}

inline void synthesise_pair(double lo, double hi, double& a, double& b) noexcept {
  constexpr double s = HaarFilters::kInvSqrt2;
  a = (lo - hi) * s;
  b = (lo + hi) * s;
}

template <typename T>
inline void synthesise_store(double lo, double hi, T& a, T& b) noexcept {
  double da, db;
  synthesise_pair(lo, hi, da, db);
  a = static_cast<T>(da);
  b = static_cast<T>(db);
}

}  // namespace

std::string_view subband_name(Subband s) noexcept {
  static constexpr std::string_view names[kSubbands] = {"lll", "llh", "lhl", "lhh",
                                                        "hll", "hlh", "hhl", "hhh"};
  return names[static_cast<std::size_t>(s)];
}

CoefficientTensor::CoefficientTensor(Dims3 half_dims, float fill)
    : map_(kSubbands, half_dims, fill) {}

CoefficientTensor::CoefficientTensor(FeatureMap<float> map) : map_(std::move(map)) {
  if (map_.channels() != kSubbands) {
    throw InvalidArgument("coefficient tensor needs exactly 8 subband channels, got " +
                          std::to_string(map_.channels()));
  }
}

bool CoefficientTensor::all_finite() const noexcept {
  for (float v : map_.data()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool CoefficientTensor::bit_equal(const CoefficientTensor& other) const noexcept {
  return same_shape(other) &&
         (size() == 0 ||
          std::memcmp(data().data(), other.data().data(), size() * sizeof(float)) == 0);
}

namespace detail {

// Each output (kd, kh, kw) reads the 2x2x2 input block at (2kd, 2kh, 2kw)
// and runs the W, H, D butterflies in that order. Rows of the block are
// contiguous in memory so the sweep walks two planes at a time.
template <typename T>
void haar_analysis(std::span<const T> in, Dims3 dims, std::span<T> out) {
  const Dims3 half = dims.halved();
  const std::size_t plane = half.voxels();
  const std::size_t H = dims.h, W = dims.w;
  for (std::size_t kd = 0; kd < half.d; ++kd) {
    for (std::size_t kh = 0; kh < half.h; ++kh) {
      const T* r00 = in.data() + ((2 * kd) * H + 2 * kh) * W;
      const T* r01 = r00 + W;
      const T* r10 = r00 + H * W;
      const T* r11 = r10 + W;
      const std::size_t base = (kd * half.h + kh) * half.w;
      for (std::size_t kw = 0; kw < half.w; ++kw) {
        const std::size_t i = 2 * kw;
        // W pass: [d][h] -> (low, high)
        double w00l, w00h, w01l, w01h, w10l, w10h, w11l, w11h;
        analyse_pair(r00[i], r00[i + 1], w00l, w00h);
        analyse_pair(r01[i], r01[i + 1], w01l, w01h);
        analyse_pair(r10[i], r10[i + 1], w10l, w10h);
        analyse_pair(r11[i], r11[i + 1], w11l, w11h);
        // H pass
        double h0ll, h0hl, h0lh, h0hh, h1ll, h1hl, h1lh, h1hh;
        analyse_pair(w00l, w01l, h0ll, h0hl);
        analyse_pair(w00h, w01h, h0lh, h0hh);
        analyse_pair(w10l, w11l, h1ll, h1hl);
        analyse_pair(w10h, w11h, h1lh, h1hh);
        // D pass; names are (H filter)(W filter) above, D filter prepended here.
        double lll, hll, llh, hlh, lhl, hhl, lhh, hhh;
        analyse_pair(h0ll, h1ll, lll, hll);
        analyse_pair(h0lh, h1lh, llh, hlh);
        analyse_pair(h0hl, h1hl, lhl, hhl);
        analyse_pair(h0hh, h1hh, lhh, hhh);
        const std::size_t o = base + kw;
        out[0 * plane + o] = static_cast<T>(lll);
        out[1 * plane + o] = static_cast<T>(llh);
        out[2 * plane + o] = static_cast<T>(lhl);
        out[3 * plane + o] = static_cast<T>(lhh);
        out[4 * plane + o] = static_cast<T>(hll);
        out[5 * plane + o] = static_cast<T>(hlh);
        out[6 * plane + o] = static_cast<T>(hhl);
        out[7 * plane + o] = static_cast<T>(hhh);
      }
    }
  }
}

template <typename T>
void haar_synthesis(std::span<const T> in, Dims3 half, std::span<T> out) {
  const Dims3 dims = half.doubled();
  const std::size_t plane = half.voxels();
  const std::size_t H = dims.h, W = dims.w;
  for (std::size_t kd = 0; kd < half.d; ++kd) {
    for (std::size_t kh = 0; kh < half.h; ++kh) {
      T* r00 = out.data() + ((2 * kd) * H + 2 * kh) * W;
      T* r01 = r00 + W;
      T* r10 = r00 + H * W;
      T* r11 = r10 + W;
      const std::size_t base = (kd * half.h + kh) * half.w;
      for (std::size_t kw = 0; kw < half.w; ++kw) {
        const std::size_t o = base + kw;
        const double lll = in[0 * plane + o], llh = in[1 * plane + o];
        const double lhl = in[2 * plane + o], lhh = in[3 * plane + o];
        const double hll = in[4 * plane + o], hlh = in[5 * plane + o];
        const double hhl = in[6 * plane + o], hhh = in[7 * plane + o];
        // Undo D, then H, then W.
        double h0ll, h1ll, h0lh, h1lh, h0hl, h1hl, h0hh, h1hh;
        synthesise_pair(lll, hll, h0ll, h1ll);
        synthesise_pair(llh, hlh, h0lh, h1lh);
        synthesise_pair(lhl, hhl, h0hl, h1hl);
        synthesise_pair(lhh, hhh, h0hh, h1hh);
        double w00l, w01l, w00h, w01h, w10l, w11l, w10h, w11h;
        synthesise_pair(h0ll, h0hl, w00l, w01l);
        synthesise_pair(h0lh, h0hh, w00h, w01h);
        synthesise_pair(h1ll, h1hl, w10l, w11l);
        synthesise_pair(h1lh, h1hh, w10h, w11h);
        const std::size_t i = 2 * kw;
        synthesise_store(w00l, w00h, r00[i], r00[i + 1]);
        synthesise_store(w01l, w01h, r01[i], r01[i + 1]);
        synthesise_store(w10l, w10h, r10[i], r10[i + 1]);
        synthesise_store(w11l, w11h, r11[i], r11[i + 1]);
      }
    }
  }
}

template void haar_analysis<float>(std::span<const float>, Dims3, std::span<float>);
template void haar_analysis<double>(std::span<const double>, Dims3, std::span<double>);
template void haar_synthesis<float>(std::span<const float>, Dims3, std::span<float>);
template void haar_synthesis<double>(std::span<const double>, Dims3, std::span<double>);

}  // namespace detail

CoefficientTensor dwt3(const Volume3& volume) {
  require_even(volume.dims(), "dwt3");
  CoefficientTensor out(volume.dims().halved());
  detail::haar_analysis<float>(volume.data(), volume.dims(), out.data());
  return out;
}

Volume3 idwt3(const CoefficientTensor& coeffs, Spacing3 spacing) {
  if (coeffs.half_dims().empty()) throw InvalidArgument("idwt3: empty coefficient tensor");
  Volume3 out(coeffs.volume_dims(), spacing);
  detail::haar_synthesis<float>(coeffs.data(), coeffs.half_dims(), out.data());
  return out;
}

template <typename T>
FeatureMap<T> dwt_downsample(const FeatureMap<T>& features) {
  require_even(features.dims(), "dwt_downsample");
  const std::size_t c = features.channels();
  FeatureMap<T> out(c * kSubbands, features.dims().halved());
  const std::size_t block = kSubbands * out.channel_size();
  for (std::size_t ch = 0; ch < c; ++ch) {
    detail::haar_analysis<T>(features.channel(ch), features.dims(),
                             out.data().subspan(ch * block, block));
  }
  return out;
}

template <typename T>
FeatureMap<T> idwt_upsample(const FeatureMap<T>& features) {
  if (features.channels() == 0 || features.channels() % kSubbands != 0) {
    throw InvalidArgument("idwt_upsample: channel count " + std::to_string(features.channels()) +
                          " is not divisible by 8");
  }
  if (features.dims().empty()) throw InvalidArgument("idwt_upsample: empty feature map");
  const std::size_t c = features.channels() / kSubbands;
  FeatureMap<T> out(c, features.dims().doubled());
  const std::size_t block = kSubbands * features.channel_size();
  for (std::size_t ch = 0; ch < c; ++ch) {
    detail::haar_synthesis<T>(features.data().subspan(ch * block, block), features.dims(),
                              out.channel(ch));
  }
  return out;
}

template FeatureMap<float> dwt_downsample(const FeatureMap<float>&);
template FeatureMap<double> dwt_downsample(const FeatureMap<double>&);
template FeatureMap<float> idwt_upsample(const FeatureMap<float>&);
template FeatureMap<double> idwt_upsample(const FeatureMap<double>&);

}  // namespace wdm
