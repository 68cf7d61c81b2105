#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>

#include "commands.hpp"
#include "wdm/parallel.hpp"
#include "wdm/preprocess.hpp"
#include "wdm/rng.hpp"
#include "wdm/synthetic.hpp"
#include "wdm/volume_io.hpp"
#include "wdm/wavelet.hpp"

namespace wdm::cli {

namespace {

std::string indexed_name(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%04zu", prefix, i);
  return buf;
}

}  // namespace

void add_synth(CLI::App& app, OptionBinder& b, SynthOptions& o) {
  b.add(&app, "count", o.count, "Number of volumes")->check(CLI::PositiveNumber);
  b.add(&app, "dims", o.dims, "Volume dims, N or DxHxW");
}

void add_preprocess(CLI::App& app, OptionBinder& b, PreprocessOptions& o) {
  b.add(&app, "input-dir", o.input_dir, "Directory of .v3r volumes")->required();
  b.add(&app, "recipe", o.recipe, "Recipe name: brats, lidc or none");
  b.add(&app, "halvings", o.halvings, "Override the number of 2x average-pool halvings");
  b.add(&app, "pad-or-crop", o.pad_or_crop, "Override the recipe's pad/crop target, N or DxHxW");
}

void add_roundtrip(CLI::App& app, OptionBinder& b, RoundtripOptions& o) {
  b.add(&app, "volume", o.volume, "Volume to check")->required();
}

int cmd_synth(const SynthOptions& o, const Context& ctx, const Json& resolved) {
  const auto dir = require_output_dir(ctx);
  const Dims3 dims = parse_dims(o.dims);
  parallel_for(o.count, ctx.global.threads, [&](std::size_t i) {
    RngState rng(ctx.global.seed, kSynthStream + i);
    save_volume(make_ellipsoid_volume(dims, rng), dir / (indexed_name("synth", i) + ".v3r"));
  });
  write_json(dir / "synth_config.json", resolved);
  ctx.out << "wrote " << o.count << " synthetic volumes of " << dims.str() << " to " << dir.string()
          << " (seed " << ctx.global.seed << ")\n";
  return kExitOk;
}

int cmd_preprocess(const PreprocessOptions& o, const Context& ctx, const Json& resolved) {
  const auto names = recipe_preset_names();
  if (std::find(names.begin(), names.end(), o.recipe) == names.end()) {
    std::string known;
    for (const auto& n : names) known += (known.empty() ? "" : ", ") + n;
    throw UsageError("unknown recipe '" + o.recipe + "' (known: " + known + ")");
  }
  PreprocessRecipe recipe = recipe_preset(o.recipe);
  if (o.halvings >= 0) recipe.downsample_halvings = static_cast<unsigned>(o.halvings);
  if (!o.pad_or_crop.empty()) recipe.pad_or_crop_target = parse_dims(o.pad_or_crop);
  recipe.validate();

  const auto dir = require_output_dir(ctx);
  if (!std::filesystem::is_directory(o.input_dir)) {
    throw IoError("input directory not found: " + o.input_dir);
  }
  const auto inputs = list_volumes(o.input_dir);
  if (inputs.empty()) ctx.err << "warning: no volumes found in " << o.input_dir << '\n';

  std::vector<Dims3> out_dims(inputs.size());
  std::vector<std::pair<float, float>> ranges(inputs.size());
  parallel_for(inputs.size(), ctx.global.threads, [&](std::size_t i) {
    const Volume3 result = apply_recipe(load_volume(inputs[i]), recipe);
    const auto [lo, hi] = std::minmax_element(result.data().begin(), result.data().end());
    out_dims[i] = result.dims();
    ranges[i] = {*lo, *hi};
    std::string stem = inputs[i].filename().string();
    stem = stem.substr(0, stem.size() - std::string(".v3r.json").size());
    save_volume(result, dir / (stem + ".v3r"));
  });

  std::map<std::string, std::size_t> histogram;
  for (const auto& d : out_dims) ++histogram[d.str()];
  Json summary;
  summary["count"] = inputs.size();
  summary["recipe"] = o.recipe;
  summary["dims_histogram"] = histogram;
  if (inputs.empty()) {
    summary["value_range"] = nullptr;
  } else {
    float lo = std::numeric_limits<float>::infinity(), hi = -lo;
    for (const auto& r : ranges) {
      lo = std::min(lo, r.first);
      hi = std::max(hi, r.second);
    }
    summary["value_range"] = {lo, hi};
  }
  summary["config"] = resolved;
  write_json(dir / "preprocess_summary.json", summary);
  ctx.out << "preprocessed " << inputs.size() << " volumes with recipe '" << o.recipe << "' into "
          << dir.string() << '\n';
  for (const auto& [d, n] : histogram) ctx.out << "  " << d << ": " << n << '\n';
  return kExitOk;
}

int cmd_roundtrip(const RoundtripOptions& o, const Context& ctx, const Json& resolved) {
  const Volume3 volume = load_volume(o.volume);
  const CoefficientTensor coeffs = dwt3(volume);
  const Volume3 back = idwt3(coeffs, volume.spacing());

  double max_err = 0.0, energy_in = 0.0, energy_coeffs = 0.0;
  for (std::size_t i = 0; i < volume.size(); ++i) {
    const double v = volume.data()[i];
    max_err = std::max(max_err, std::abs(static_cast<double>(back.data()[i]) - v));
    energy_in += v * v;
  }
  for (float c : coeffs.data()) energy_coeffs += static_cast<double>(c) * c;
  const double ratio = energy_in > 0.0 ? energy_coeffs / energy_in : (energy_coeffs == 0.0 ? 1.0 : 0.0);
  const bool ok = max_err < 1e-5 && std::abs(ratio - 1.0) < 1e-5;

  Json report;
  report["volume"] = o.volume;
  report["dims"] = dims_json(volume.dims());
  report["max_abs_error"] = max_err;
  report["energy_ratio"] = ratio;
  report["pass"] = ok;
  report["config"] = resolved;
  if (!ctx.global.output_dir.empty()) write_json(require_output_dir(ctx) / "roundtrip.json", report);
  ctx.out << "max-abs reconstruction error " << max_err << ", energy ratio " << ratio << " -> "
          << (ok ? "ok" : "FAIL") << '\n';
  ctx.out << report.dump() << '\n';
  return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace wdm::cli
