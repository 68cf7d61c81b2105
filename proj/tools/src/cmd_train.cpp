#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "commands.hpp"
#include "wdm/checkpoint.hpp"
#include "wdm/diffusion.hpp"
#include "wdm/synthetic.hpp"
#include "wdm/volume_io.hpp"

namespace wdm::cli {

namespace {

constexpr std::uint64_t kTrainStream = 0;
constexpr std::uint64_t kInitStream = 1;

struct LossRow {
  std::uint64_t iteration;
  double t_mean;
  double loss;
};

std::string loss_line(const LossRow& r) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g", static_cast<unsigned long long>(r.iteration), r.t_mean,
                r.loss);
  return buf;
}

// Rows of an earlier run up to and including `upto`.
std::vector<LossRow> read_loss_history(const std::filesystem::path& path, std::uint64_t upto) {
  std::vector<LossRow> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    LossRow r{};
    unsigned long long it = 0;
    if (std::sscanf(line.c_str(), "%llu,%lf,%lf", &it, &r.t_mean, &r.loss) != 3) {
      throw IoError("malformed row in " + path.string() + ": " + line);
    }
    r.iteration = it;
    if (r.iteration <= upto) rows.push_back(r);
  }
  return rows;
}

std::string step_name(std::uint64_t step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step-%08llu", static_cast<unsigned long long>(step));
  return buf;
}

void remove_checkpoint(const std::filesystem::path& base) {
  const auto paths = checkpoint_paths(base);
  std::filesystem::remove(paths.manifest);
  std::filesystem::remove(paths.parameters);
  std::filesystem::remove(paths.moments);
}

void enforce_retention(const std::filesystem::path& dir, std::size_t keep) {
  std::vector<std::string> bases;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    const std::string suffix = ".ckpt.json";
    if (name.rfind("step-", 0) == 0 && name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      bases.push_back(name.substr(0, name.size() - suffix.size()));
    }
  }
  std::sort(bases.begin(), bases.end());
  while (bases.size() > keep) {
    remove_checkpoint(dir / bases.front());
    bases.erase(bases.begin());
  }
}

double window_mean(const std::vector<LossRow>& rows, std::size_t begin, std::size_t end) {
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) s += rows[i].loss;
  return end > begin ? s / static_cast<double>(end - begin) : 0.0;
}

std::vector<CoefficientTensor> load_dataset(const TrainOptions& o, std::uint64_t seed, Dims3& dims) {
  std::vector<CoefficientTensor> data;
  if (!o.dataset_dir.empty()) {
    const auto files = list_volumes(o.dataset_dir);
    if (files.empty()) throw IoError("no volumes in dataset directory " + o.dataset_dir);
    for (const auto& f : files) {
      const Volume3 v = load_volume(f);
      if (data.empty()) {
        dims = v.dims();
      } else if (v.dims() != dims) {
        throw InvalidArgument("dataset volumes differ in dims: " + f.string() + " is " + v.dims().str() +
                              ", expected " + dims.str());
      }
      data.push_back(dwt3(v));
    }
    return data;
  }
  dims = parse_dims(o.dims);
  if (o.synthetic_count == 0) throw UsageError("--synthetic-count must be positive");
  for (std::size_t i = 0; i < o.synthetic_count; ++i) {
    RngState rng(seed, kSynthStream + i);
    Volume3 v = make_ellipsoid_volume(dims, rng);
    for (float& x : v.data()) x = 2.0f * x - 1.0f;
    data.push_back(dwt3(v));
  }
  return data;
}

}  // namespace

void add_train(CLI::App& app, OptionBinder& b, TrainOptions& o) {
  b.add(&app, "preset", o.preset, "desk, or paper (published hyperparameters; needs --allow-paper-preset)");
  b.add(&app, "allow-paper-preset", o.allow_paper_preset, "Allow training with the paper preset");
  b.add(&app, "schedule", o.schedule, "Noise schedule preset, linear-<T>");
  b.add(&app, "iterations", o.iterations, "Total training iterations")->check(CLI::PositiveNumber);
  b.add(&app, "batch-size", o.batch_size, "Volumes per iteration")->check(CLI::PositiveNumber);
  b.add(&app, "learning-rate", o.learning_rate, "Adam learning rate")->check(CLI::PositiveNumber);
  b.add(&app, "base-channels", o.base_channels, "Network base channels")->check(CLI::PositiveNumber);
  b.add(&app, "wavelet-variant", o.wavelet_variant, "Add the wavelet down/up mid block");
  b.add(&app, "dataset-dir", o.dataset_dir, "Directory of training volumes; empty uses synthetic ellipsoids");
  b.add(&app, "synthetic-count", o.synthetic_count, "Synthetic volumes, mapped from [0,1] to [-1,1]");
  b.add(&app, "dims", o.dims, "Synthetic volume dims, N or DxHxW");
  b.add(&app, "checkpoint-every", o.checkpoint_every, "Checkpoint cadence in iterations")
      ->check(CLI::PositiveNumber);
  b.add(&app, "keep-last", o.keep_last, "Step checkpoints retained besides 'best'")->check(CLI::PositiveNumber);
  b.add(&app, "resume", o.resume, "Checkpoint to continue from");
}

int cmd_train(TrainOptions o, const Context& ctx, Json resolved) {
  if (o.preset == "paper") {
    if (!o.allow_paper_preset) {
      throw UsageError(
          "the 'paper' preset (C=64, lr 1e-5, batch 10, 1.2M iterations, T=1000) targets a 40 GB GPU and "
          "is not trainable at desk scale; pass --allow-paper-preset to run it anyway");
    }
    o.schedule = "linear-1000";
    o.base_channels = 64;
    o.learning_rate = 1e-5;
    o.batch_size = 10;
    o.iterations = 1200000;
  } else if (o.preset != "desk") {
    throw UsageError("unknown preset '" + o.preset + "' (known: desk, paper)");
  }

  ScheduleSpec spec;
  try {
    spec = schedule_preset(o.schedule);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  NetConfig net_config{o.base_channels, 4 * o.base_channels, o.wavelet_variant};
  std::uint64_t seed = ctx.global.seed;

  const auto out_dir = require_output_dir(ctx);
  const auto ckpt_dir = out_dir / "checkpoints";
  std::filesystem::create_directories(ckpt_dir);

  std::optional<Checkpoint> resumed;
  if (!o.resume.empty()) {
    resumed = load_checkpoint(o.resume);
    if (resumed->rng.seed() != seed) {
      ctx.err << "note: using the checkpoint's seed " << resumed->rng.seed() << " instead of " << seed << '\n';
      seed = resumed->rng.seed();
    }
    if (resumed->schedule != spec || !(resumed->net == net_config)) {
      ctx.err << "note: schedule and architecture are taken from the checkpoint\n";
    }
    spec = resumed->schedule;
    net_config = resumed->net;
    o.learning_rate = resumed->optimizer.config.learning_rate;
  }

  Dims3 dims;
  const auto data = load_dataset(o, seed, dims);
  if (resumed && resumed->volume_dims != dims) {
    throw InvalidArgument("checkpoint was trained on " + resumed->volume_dims.str() + " volumes, dataset is " +
                          dims.str());
  }

  const NoiseSchedule schedule = NoiseSchedule::from_spec(spec);
  TinyConvDenoiser denoiser(net_config);
  denoiser.net().check_input(data.front().map());
  AdamState adam(AdamConfig{o.learning_rate}, denoiser.net().parameter_count());
  RngState rng(seed, kTrainStream);
  std::uint64_t start = 0;
  if (resumed) {
    denoiser = TinyConvDenoiser(network_from(*resumed));
    adam = resumed->optimizer;
    rng = resumed->rng;
    start = resumed->step;
  } else {
    RngState init_rng(seed, kInitStream);
    denoiser.net().init(init_rng);
  }

  resolved["seed"] = seed;
  resolved["schedule"] = o.schedule;
  resolved["base-channels"] = net_config.base_channels;
  resolved["learning-rate"] = o.learning_rate;
  resolved["batch-size"] = o.batch_size;
  resolved["iterations"] = o.iterations;
  resolved["resolved_schedule"] = {{"timesteps", spec.timesteps},
                                   {"beta_start", spec.beta_start},
                                   {"beta_end", spec.beta_end},
                                   {"hash", schedule.hash()}};
  resolved["volume_dims"] = dims_json(dims);
  write_json(out_dir / "config.json", resolved);

  const auto loss_path = out_dir / "loss.csv";
  std::vector<LossRow> history = resumed ? read_loss_history(loss_path, start) : std::vector<LossRow>{};
  {
    std::ofstream csv(loss_path, std::ios::trunc);
    if (!csv) throw IoError("cannot open for writing: " + loss_path.string());
    csv << "iteration,t_mean,loss\n";
    for (const auto& r : history) csv << loss_line(r) << '\n';
  }
  std::ofstream csv(loss_path, std::ios::app);

  double best = std::numeric_limits<double>::infinity();
  if (resumed) {
    const auto best_path = ckpt_dir / "best.json";
    if (std::filesystem::exists(best_path)) best = read_json(best_path).at("window_loss").get<double>();
  }

  auto make_checkpoint = [&](std::uint64_t step) {
    Checkpoint c;
    c.net = net_config;
    c.parameters.assign(denoiser.parameters().begin(), denoiser.parameters().end());
    c.optimizer = adam;
    c.step = step;
    c.rng = rng;
    c.schedule = spec;
    c.volume_dims = dims;
    return c;
  };

  ctx.out << "training " << (o.wavelet_variant ? "wavelet-variant " : "") << "network (C=" << net_config.base_channels
          << ", " << denoiser.parameters().size() << " parameters) on " << data.size() << " volumes of "
          << dims.str() << ", schedule " << o.schedule << ", seed " << seed << '\n';
  const auto t0 = std::chrono::steady_clock::now();
  std::uint64_t last_ckpt = start;
  std::vector<CoefficientTensor> batch;
  for (std::uint64_t step = start + 1; step <= o.iterations; ++step) {
    batch.clear();
    for (std::size_t b = 0; b < o.batch_size; ++b) batch.push_back(data[rng.uniform_index(data.size())]);
    TrainStepResult r;
    try {
      r = train_step(batch, denoiser, schedule, rng, adam);
    } catch (const NumericError& e) {
      save_checkpoint(make_checkpoint(step - 1), ckpt_dir / "diverged");
      throw CheckFailed("training diverged at iteration " + std::to_string(step) + " (" + e.what() +
                        "); state saved to " + (ckpt_dir / "diverged").string());
    }
    history.push_back({step, r.t_mean, r.loss});
    csv << loss_line(history.back()) << '\n';

    if (step % o.checkpoint_every == 0 || step == o.iterations) {
      csv.flush();
      const Checkpoint c = make_checkpoint(step);
      save_checkpoint(c, ckpt_dir / step_name(step));
      enforce_retention(ckpt_dir, o.keep_last);
      const std::size_t n = history.size();
      const std::size_t since = static_cast<std::size_t>(step - last_ckpt);
      const double window = window_mean(history, n - std::min(n, since), n);
      if (window < best) {
        best = window;
        save_checkpoint(c, ckpt_dir / "best");
        write_json(ckpt_dir / "best.json", {{"step", step}, {"window_loss", window}});
      }
      last_ckpt = step;
      ctx.out << "  iteration " << step << ": loss " << r.loss << ", window mean " << window << '\n';
    }
  }
  csv.close();
  save_checkpoint(make_checkpoint(std::max<std::uint64_t>(start, o.iterations)), out_dir / "model");
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::size_t n = history.size();
  const std::size_t w = std::min<std::size_t>(50, std::max<std::size_t>(1, n / 4));
  Json summary;
  summary["iterations"] = n;
  summary["seed"] = seed;
  summary["window"] = w;
  summary["first_window_mean"] = window_mean(history, 0, std::min(w, n));
  summary["last_window_mean"] = window_mean(history, n - std::min(w, n), n);
  summary["final_loss"] = n ? history.back().loss : 0.0;
  summary["seconds"] = seconds;
  summary["model"] = (out_dir / "model.ckpt.json").string();
  write_json(out_dir / "train_summary.json", summary);
  ctx.out << "done in " << seconds << " s; mean loss first " << w << " steps "
          << summary["first_window_mean"].get<double>() << ", last " << w << " steps "
          << summary["last_window_mean"].get<double>() << "; model at " << summary["model"].get<std::string>()
          << '\n';
  return kExitOk;
}

}  // namespace wdm::cli
