#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "cli.hpp"
#include "options.hpp"

namespace wdm::cli {

/// Synthetic volume i of a run is drawn from rng stream kSynthStream + i.
inline constexpr std::uint64_t kSynthStream = 1ULL << 32;

struct SynthOptions {
  std::size_t count = 4;
  std::string dims = "16";
};

struct PreprocessOptions {
  std::string input_dir;
  std::string recipe = "brats";
  int halvings = -1;  // -1 keeps the recipe's value
  std::string pad_or_crop;  // empty keeps the recipe's target
};

struct RoundtripOptions {
  std::string volume;
};

struct TrainOptions {
  std::string preset = "desk";
  bool allow_paper_preset = false;
  std::string schedule = "linear-1000";
  std::size_t iterations = 200;
  std::size_t batch_size = 4;
  double learning_rate = 1e-3;
  std::size_t base_channels = 8;
  bool wavelet_variant = false;
  std::string dataset_dir;
  std::size_t synthetic_count = 16;
  std::string dims = "16";
  std::size_t checkpoint_every = 50;
  std::size_t keep_last = 3;
  std::string resume;
};

struct SampleOptions {
  std::string checkpoint;
  std::size_t count = 1;
  std::string dims;
  bool analytic = false;
  double mu0 = 0.0;
  double var0 = 1.0;
  std::string schedule = "linear-1000";
};

struct EvalOptions {
  std::string mode = "diversity";
  std::string samples_dir;
  std::string reference_dir;
  std::string features_a;
  std::string features_b;
  bool toy_features = false;
};

struct BenchOptions {
  std::string dims = "64";
  std::size_t reps = 10;
};

void add_synth(CLI::App& app, OptionBinder& b, SynthOptions& o);
void add_preprocess(CLI::App& app, OptionBinder& b, PreprocessOptions& o);
void add_roundtrip(CLI::App& app, OptionBinder& b, RoundtripOptions& o);
void add_train(CLI::App& app, OptionBinder& b, TrainOptions& o);
void add_sample(CLI::App& app, OptionBinder& b, SampleOptions& o);
void add_eval(CLI::App& app, OptionBinder& b, EvalOptions& o);
void add_bench(CLI::App& app, OptionBinder& b, BenchOptions& o);

int cmd_synth(const SynthOptions& o, const Context& ctx, const Json& resolved);
int cmd_preprocess(const PreprocessOptions& o, const Context& ctx, const Json& resolved);
int cmd_roundtrip(const RoundtripOptions& o, const Context& ctx, const Json& resolved);
int cmd_train(TrainOptions o, const Context& ctx, Json resolved);
int cmd_sample(const SampleOptions& o, const Context& ctx, const Json& resolved);
int cmd_eval(const EvalOptions& o, const Context& ctx, const Json& resolved);
int cmd_bench(const BenchOptions& o, const Context& ctx, const Json& resolved);
int cmd_presets(const Context& ctx);

}  // namespace wdm::cli
