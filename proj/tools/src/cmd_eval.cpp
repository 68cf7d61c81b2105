#include "commands.hpp"
#include "wdm/hash.hpp"
#include "wdm/metrics.hpp"
#include "wdm/parallel.hpp"
#include "wdm/volume_io.hpp"

namespace wdm::cli {

namespace {

std::vector<Volume3> load_all(const std::string& dir, unsigned threads) {
  if (dir.empty()) throw UsageError("a samples directory is required");
  if (!std::filesystem::is_directory(dir)) throw IoError("directory not found: " + dir);
  const auto files = list_volumes(dir);
  std::vector<Volume3> volumes(files.size());
  parallel_for(files.size(), threads, [&](std::size_t i) { volumes[i] = load_volume(files[i]); });
  return volumes;
}

std::vector<std::vector<double>> toy_feature_set(const std::string& dir, unsigned threads) {
  const auto volumes = load_all(dir, threads);
  std::vector<std::vector<double>> features(volumes.size());
  parallel_for(volumes.size(), threads, [&](std::size_t i) { features[i] = toy_features(volumes[i]); });
  return features;
}

}  // namespace

void add_eval(CLI::App& app, OptionBinder& b, EvalOptions& o) {
  b.add(&app, "mode", o.mode, "diversity or frechet")->check(CLI::IsMember({"diversity", "frechet"}));
  b.add(&app, "samples-dir", o.samples_dir, "Generated volumes");
  b.add(&app, "reference-dir", o.reference_dir, "Reference volumes (frechet with --toy-features)");
  b.add(&app, "features-a", o.features_a, "Feature CSV for the first set (frechet)");
  b.add(&app, "features-b", o.features_b, "Feature CSV for the second set (frechet)");
  b.add(&app, "toy-features", o.toy_features,
        "Frechet on mean, variance and per-axis gradient energy instead of feature CSVs");
}

int cmd_eval(const EvalOptions& o, const Context& ctx, const Json& resolved) {
  Json hashed = resolved;
  hashed.erase("threads");
  hashed.erase("output-dir");
  Json result;
  result["metric"] = o.mode == "diversity" ? "ms_ssim_diversity" : "frechet_distance";

  if (o.mode == "diversity") {
    const auto volumes = load_all(o.samples_dir, ctx.global.threads);
    if (volumes.size() < 2) {
      throw InvalidArgument("diversity needs at least 2 samples, found " + std::to_string(volumes.size()) +
                            " in " + o.samples_dir);
    }
    RngState rng(ctx.global.seed, 0);
    result["value"] = diversity_ms_ssim(volumes, rng, MsSsimConfig{}, ctx.global.threads);
    result["n"] = volumes.size();
  } else {
    std::vector<std::vector<double>> a, b;
    if (o.toy_features) {
      if (o.reference_dir.empty()) throw UsageError("--toy-features needs --samples-dir and --reference-dir");
      a = toy_feature_set(o.samples_dir, ctx.global.threads);
      b = toy_feature_set(o.reference_dir, ctx.global.threads);
    } else {
      if (o.features_a.empty() || o.features_b.empty()) {
        throw UsageError("frechet needs --features-a and --features-b, or --toy-features");
      }
      a = read_feature_csv(o.features_a);
      b = read_feature_csv(o.features_b);
    }
    if (!a.empty() && !b.empty() && a.front().size() != b.front().size()) {
      throw InvalidArgument("feature dimension mismatch: " + std::to_string(a.front().size()) + " vs " +
                            std::to_string(b.front().size()));
    }
    result["value"] = frechet_distance(feature_stats(a), feature_stats(b));
    result["n"] = a.size();
    result["n_reference"] = b.size();
  }
  result["config_hash"] = hex64(fnv1a64(hashed.dump()));
  result["seed"] = ctx.global.seed;

  if (!ctx.global.output_dir.empty()) {
    Json record = result;
    record["config"] = resolved;
    write_json(require_output_dir(ctx) / "eval.json", record);
  }
  ctx.out << result["metric"].get<std::string>() << " = " << result["value"].get<double>() << " over "
          << result["n"].get<std::size_t>() << " samples (seed " << ctx.global.seed << ")\n";
  ctx.out << result.dump() << '\n';
  return kExitOk;
}

}  // namespace wdm::cli
