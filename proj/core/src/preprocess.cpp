#include "wdm/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wdm/error.hpp"

namespace wdm {

namespace {

void require_nonempty(const Volume3& v, const char* op) {
  if (v.empty()) throw InvalidArgument(std::string(op) + ": empty volume");
}

// ceil(pct/100 * n) with a small tolerance so decimal inputs like 99.9 do not
// round up past the intended rank.
std::size_t nearest_rank(double pct, std::size_t n) {
  const double x = pct / 100.0 * static_cast<double>(n);
  const double r = std::ceil(x - 1e-9 * std::max(1.0, x));
  const auto rank = static_cast<std::size_t>(std::max(1.0, r));
  return std::min(rank, n);
}

struct AxisSamples {
  std::vector<std::size_t> lo;
  std::vector<std::size_t> hi;
  std::vector<double> frac;
};

AxisSamples axis_samples(std::size_t n_in, std::size_t n_out, double s_in, double s_out) {
  AxisSamples a;
  a.lo.resize(n_out);
  a.hi.resize(n_out);
  a.frac.resize(n_out);
  const double last = static_cast<double>(n_in - 1);
  for (std::size_t i = 0; i < n_out; ++i) {
    double x = (static_cast<double>(i) + 0.5) * s_out / s_in - 0.5;
    x = std::clamp(x, 0.0, last);
    const double f = std::floor(x);
    a.lo[i] = static_cast<std::size_t>(f);
    a.hi[i] = std::min(a.lo[i] + 1, n_in - 1);
    a.frac[i] = x - f;
  }
  return a;
}

std::size_t offset_of(std::size_t big, std::size_t small) { return (big - small) / 2; }

}  // namespace

float nearest_rank_percentile(const Volume3& volume, double pct) {
  require_nonempty(volume, "percentile");
  if (!(pct >= 0.0 && pct <= 100.0)) throw InvalidArgument("percentile must lie in [0, 100]");
  std::vector<float> values(volume.data().begin(), volume.data().end());
  const std::size_t k = nearest_rank(pct, values.size()) - 1;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
  return values[k];
}

Volume3 clip_percentiles(const Volume3& volume, double lower_pct, double upper_pct) {
  require_nonempty(volume, "clip_percentiles");
  if (!(lower_pct >= 0.0 && lower_pct < upper_pct && upper_pct <= 100.0)) {
    throw InvalidArgument("clip_percentiles needs 0 <= lower < upper <= 100");
  }
  std::vector<float> values(volume.data().begin(), volume.data().end());
  const std::size_t n = values.size();
  const std::size_t k_lo = nearest_rank(lower_pct, n) - 1;
  const std::size_t k_hi = nearest_rank(upper_pct, n) - 1;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k_hi), values.end());
  const float v_hi = values[k_hi];
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k_lo),
                   values.begin() + static_cast<std::ptrdiff_t>(k_hi) + 1);
  const float v_lo = values[k_lo];

  Volume3 out = volume;
  for (float& v : out.data()) v = std::clamp(v, v_lo, v_hi);
  return out;
}

Volume3 clip_floor(const Volume3& volume, double floor) {
  if (!std::isfinite(floor)) throw InvalidArgument("clip_floor: floor must be finite");
  const auto f = static_cast<float>(floor);
  Volume3 out = volume;
  for (float& v : out.data()) v = std::max(v, f);
  return out;
}

Volume3 resample_isotropic(const Volume3& volume, double target_spacing) {
  require_nonempty(volume, "resample_isotropic");
  if (!(target_spacing > 0.0) || !std::isfinite(target_spacing)) {
    throw InvalidArgument("resample_isotropic: target spacing must be positive");
  }
  const Dims3& in = volume.dims();
  const Spacing3& sp = volume.spacing();
  auto out_len = [&](std::size_t axis) {
    const double n = std::round(static_cast<double>(in[axis]) * sp[axis] / target_spacing);
    return static_cast<std::size_t>(std::max(1.0, n));
  };
  const Dims3 od{out_len(0), out_len(1), out_len(2)};
  const AxisSamples ad = axis_samples(in.d, od.d, sp.d, target_spacing);
  const AxisSamples ah = axis_samples(in.h, od.h, sp.h, target_spacing);
  const AxisSamples aw = axis_samples(in.w, od.w, sp.w, target_spacing);

  Volume3 out(od, {target_spacing, target_spacing, target_spacing});
  auto src = [&](std::size_t d, std::size_t h, std::size_t w) {
    return static_cast<double>(volume.at(d, h, w));
  };
  for (std::size_t z = 0; z < od.d; ++z) {
    const std::size_t z0 = ad.lo[z], z1 = ad.hi[z];
    const double fz = ad.frac[z];
    for (std::size_t y = 0; y < od.h; ++y) {
      const std::size_t y0 = ah.lo[y], y1 = ah.hi[y];
      const double fy = ah.frac[y];
      for (std::size_t x = 0; x < od.w; ++x) {
        const std::size_t x0 = aw.lo[x], x1 = aw.hi[x];
        const double fx = aw.frac[x];
        const double c00 = src(z0, y0, x0) * (1 - fx) + src(z0, y0, x1) * fx;
        const double c01 = src(z0, y1, x0) * (1 - fx) + src(z0, y1, x1) * fx;
        const double c10 = src(z1, y0, x0) * (1 - fx) + src(z1, y0, x1) * fx;
        const double c11 = src(z1, y1, x0) * (1 - fx) + src(z1, y1, x1) * fx;
        const double c0 = c00 * (1 - fy) + c01 * fy;
        const double c1 = c10 * (1 - fy) + c11 * fy;
        out.at(z, y, x) = static_cast<float>(c0 * (1 - fz) + c1 * fz);
      }
    }
  }
  return out;
}

Volume3 zero_pad_to(const Volume3& volume, Dims3 target) {
  require_nonempty(volume, "zero_pad_to");
  const Dims3& in = volume.dims();
  for (std::size_t a = 0; a < 3; ++a) {
    if (target[a] < in[a]) {
      throw InvalidArgument(std::string("zero_pad_to: target smaller than input along axis ") +
                            kAxisNames[a]);
    }
  }
  Volume3 out(target, volume.spacing(), 0.0f);
  const std::size_t od = offset_of(target.d, in.d);
  const std::size_t oh = offset_of(target.h, in.h);
  const std::size_t ow = offset_of(target.w, in.w);
  for (std::size_t d = 0; d < in.d; ++d) {
    for (std::size_t h = 0; h < in.h; ++h) {
      const auto row = volume.data().subspan(volume.index(d, h, 0), in.w);
      std::copy(row.begin(), row.end(), out.data().begin() + static_cast<std::ptrdiff_t>(out.index(d + od, h + oh, ow)));
    }
  }
  return out;
}

Volume3 center_crop(const Volume3& volume, Dims3 target) {
  require_nonempty(volume, "center_crop");
  const Dims3& in = volume.dims();
  for (std::size_t a = 0; a < 3; ++a) {
    if (target[a] > in[a] || target[a] == 0) {
      throw InvalidArgument(std::string("center_crop: target larger than input along axis ") +
                            kAxisNames[a]);
    }
  }
  Volume3 out(target, volume.spacing());
  const std::size_t od = offset_of(in.d, target.d);
  const std::size_t oh = offset_of(in.h, target.h);
  const std::size_t ow = offset_of(in.w, target.w);
  for (std::size_t d = 0; d < target.d; ++d) {
    for (std::size_t h = 0; h < target.h; ++h) {
      const auto row = volume.data().subspan(volume.index(d + od, h + oh, ow), target.w);
      std::copy(row.begin(), row.end(), out.data().begin() + static_cast<std::ptrdiff_t>(out.index(d, h, 0)));
    }
  }
  return out;
}

Volume3 pad_or_crop_to(const Volume3& volume, Dims3 target) {
  const Dims3& in = volume.dims();
  const Dims3 cropped{std::min(in.d, target.d), std::min(in.h, target.h), std::min(in.w, target.w)};
  Volume3 out = cropped == in ? volume : center_crop(volume, cropped);
  return cropped == target ? out : zero_pad_to(out, target);
}

Volume3 normalize_to_range(const Volume3& volume, double lo, double hi) {
  require_nonempty(volume, "normalize_to_range");
  if (!(lo < hi)) throw InvalidArgument("normalize_to_range needs lo < hi");
  const auto [mn_it, mx_it] = std::minmax_element(volume.data().begin(), volume.data().end());
  const double mn = *mn_it, mx = *mx_it;
  Volume3 out = volume;
  if (mn == mx) {
    std::fill(out.data().begin(), out.data().end(), static_cast<float>((lo + hi) / 2.0));
    return out;
  }
  const double range = mx - mn;
  const double width = hi - lo;
  for (float& v : out.data()) {
    const double x = v;
    double y;
    if (x == mn) {
      y = lo;
    } else if (x == mx) {
      y = hi;
    } else {
      y = std::clamp(lo + (x - mn) / range * width, lo, hi);
    }
    v = static_cast<float>(y);
  }
  return out;
}

Volume3 avg_pool2(const Volume3& volume) {
  require_nonempty(volume, "avg_pool2");
  const Dims3& in = volume.dims();
  for (std::size_t a = 0; a < 3; ++a) {
    if (in[a] % 2 != 0) {
      throw InvalidArgument(std::string("avg_pool2: odd dimension along axis ") + kAxisNames[a]);
    }
  }
  const Spacing3& s = volume.spacing();
  Volume3 out(in.halved(), {2 * s.d, 2 * s.h, 2 * s.w});
  const Dims3 od = out.dims();
  for (std::size_t d = 0; d < od.d; ++d) {
    for (std::size_t h = 0; h < od.h; ++h) {
      for (std::size_t w = 0; w < od.w; ++w) {
        double sum = 0.0;
        for (std::size_t i = 0; i < 2; ++i) {
          for (std::size_t j = 0; j < 2; ++j) {
            sum += static_cast<double>(volume.at(2 * d + i, 2 * h + j, 2 * w)) +
                   static_cast<double>(volume.at(2 * d + i, 2 * h + j, 2 * w + 1));
          }
        }
        out.at(d, h, w) = static_cast<float>(sum / 8.0);
      }
    }
  }
  return out;
}

void PreprocessRecipe::validate() const {
  if (clip_floor && !std::isfinite(*clip_floor)) throw InvalidArgument("clip_floor must be finite");
  if (clip_lower_pct && !(*clip_lower_pct >= 0.0 && *clip_lower_pct < 100.0)) {
    throw InvalidArgument("clip_lower_pct must lie in [0, 100)");
  }
  if (clip_upper_pct && !(*clip_upper_pct > 0.0 && *clip_upper_pct <= 100.0)) {
    throw InvalidArgument("clip_upper_pct must lie in (0, 100]");
  }
  if (clip_lower_pct && clip_upper_pct && !(*clip_lower_pct < *clip_upper_pct)) {
    throw InvalidArgument("clip_lower_pct must be below clip_upper_pct");
  }
  if (resample_spacing && !(*resample_spacing > 0.0)) {
    throw InvalidArgument("resample_spacing must be positive");
  }
  if (pad_or_crop_target && pad_or_crop_target->empty()) {
    throw InvalidArgument("pad_or_crop_target must be positive on every axis");
  }
  if (normalize_range && !(normalize_range->first < normalize_range->second)) {
    throw InvalidArgument("normalize_range needs lo < hi");
  }
}

PreprocessRecipe recipe_preset(std::string_view name) {
  PreprocessRecipe r;
  if (name == "brats") {
    r.clip_lower_pct = 0.1;
    r.clip_upper_pct = 99.9;
    r.pad_or_crop_target = Dims3{256, 256, 256};
    r.normalize_range = {-1.0, 1.0};
  } else if (name == "lidc") {
    r.clip_floor = -1000.0;
    r.clip_upper_pct = 99.9;
    r.resample_spacing = 1.0;
    r.pad_or_crop_target = Dims3{256, 256, 256};
    r.normalize_range = {-1.0, 1.0};
  } else if (name != "none") {
    throw InvalidArgument("unknown recipe '" + std::string(name) + "' (known: brats, lidc, none)");
  }
  return r;
}

std::vector<std::string> recipe_preset_names() { return {"brats", "lidc", "none"}; }

Volume3 apply_recipe(const Volume3& volume, const PreprocessRecipe& recipe) {
  recipe.validate();
  Volume3 v = volume;
  if (recipe.clip_floor) v = clip_floor(v, *recipe.clip_floor);
  if (recipe.clip_lower_pct || recipe.clip_upper_pct) {
    v = clip_percentiles(v, recipe.clip_lower_pct.value_or(0.0), recipe.clip_upper_pct.value_or(100.0));
  }
  if (recipe.resample_spacing) v = resample_isotropic(v, *recipe.resample_spacing);
  if (recipe.pad_or_crop_target) v = pad_or_crop_to(v, *recipe.pad_or_crop_target);
  if (recipe.normalize_range) {
    v = normalize_to_range(v, recipe.normalize_range->first, recipe.normalize_range->second);
  }
  for (unsigned i = 0; i < recipe.downsample_halvings; ++i) v = avg_pool2(v);
  return v;
}

}  // namespace wdm
