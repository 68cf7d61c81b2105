#include <chrono>
#include <cstdio>
#include <memory>

#include "commands.hpp"
#include "wdm/checkpoint.hpp"
#include "wdm/diffusion.hpp"
#include "wdm/parallel.hpp"
#include "wdm/volume_io.hpp"

namespace wdm::cli {

void add_sample(CLI::App& app, OptionBinder& b, SampleOptions& o) {
  b.add(&app, "checkpoint", o.checkpoint, "Trained checkpoint (base name or .ckpt.json)");
  b.add(&app, "count", o.count, "Number of volumes")->check(CLI::PositiveNumber);
  b.add(&app, "dims", o.dims, "Volume dims, N or DxHxW; must match the checkpoint");
  b.add(&app, "analytic", o.analytic, "Use the analytic Gaussian denoiser instead of a checkpoint");
  b.add(&app, "mu0", o.mu0, "Analytic mode: coefficient mean");
  b.add(&app, "var0", o.var0, "Analytic mode: coefficient variance")->check(CLI::PositiveNumber);
  b.add(&app, "schedule", o.schedule, "Analytic mode: noise schedule preset");
}

int cmd_sample(const SampleOptions& o, const Context& ctx, const Json& resolved) {
  if (o.analytic == !o.checkpoint.empty()) {
    throw UsageError("give exactly one of --checkpoint or --analytic");
  }
  std::unique_ptr<Denoiser> denoiser;
  ScheduleSpec spec;
  Dims3 dims;
  if (o.analytic) {
    try {
      spec = schedule_preset(o.schedule);
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
    dims = parse_dims(o.dims.empty() ? "16" : o.dims);
    denoiser = std::make_unique<AnalyticGaussianDenoiser>(o.mu0, o.var0, NoiseSchedule::from_spec(spec));
  } else {
    const Checkpoint ckpt = load_checkpoint(o.checkpoint);
    spec = ckpt.schedule;
    dims = ckpt.volume_dims;
    if (!o.dims.empty() && parse_dims(o.dims) != dims) {
      throw InvalidArgument("shape mismatch: checkpoint was trained on " + dims.str() + " volumes, requested " +
                            parse_dims(o.dims).str());
    }
    denoiser = std::make_unique<TinyConvDenoiser>(network_from(ckpt));
  }
  if (!dims.all_even()) throw InvalidArgument("volume dims " + dims.str() + " must be even");
  const NoiseSchedule schedule = NoiseSchedule::from_spec(spec);
  const Dims3 half = dims.halved();
  const auto dir = require_output_dir(ctx);

  std::vector<std::string> files(o.count);
  std::vector<std::uint64_t> streams(o.count);
  const auto t0 = std::chrono::steady_clock::now();
  parallel_for(o.count, ctx.global.threads, [&](std::size_t i) {
    streams[i] = i + 1;
    RngState rng(ctx.global.seed, streams[i]);
    const Volume3 v = sample(*denoiser, half, schedule, rng);
    if (v.dims() != dims || !v.all_finite()) {
      throw CheckFailed("sample " + std::to_string(i) + " failed the dims/finiteness check");
    }
    char name[32];
    std::snprintf(name, sizeof name, "sample-%04zu.v3r", i);
    save_volume(v, dir / name);
    files[i] = std::string(name) + ".json";
  });
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  Json manifest;
  manifest["seed"] = ctx.global.seed;
  manifest["count"] = o.count;
  manifest["stream_ids"] = streams;
  manifest["files"] = files;
  manifest["schedule_hash"] = schedule.hash();
  manifest["schedule"] = {{"timesteps", spec.timesteps}, {"beta_start", spec.beta_start}, {"beta_end", spec.beta_end}};
  manifest["denoiser"] = denoiser->name();
  manifest["dims"] = dims_json(dims);
  manifest["config"] = resolved;
  write_json(dir / "manifest.json", manifest);
  ctx.out << "sampled " << o.count << " volumes of " << dims.str() << " with " << denoiser->name() << " (seed "
          << ctx.global.seed << ", " << spec.timesteps << " steps) in " << seconds << " s into " << dir.string()
          << '\n';
  return kExitOk;
}

}  // namespace wdm::cli
