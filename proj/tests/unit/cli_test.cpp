#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include <json.hpp>

#include "cli.hpp"
#include "test_util.hpp"
#include "wdm/volume_io.hpp"

namespace wdm {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

struct RunResult {
  int code = 0;
  std::string out;
  std::string err;

  Json last_json() const {
    std::istringstream in(out);
    std::string line, last;
    while (std::getline(in, line)) {
      if (!line.empty() && line.front() == '{') last = line;
    }
    return Json::parse(last);
  }
};

RunResult run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  RunResult r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

Json read(const fs::path& p) {
  std::ifstream in(p);
  return Json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run_cli({"--help"}).code, 0);
  EXPECT_EQ(run_cli({}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"synth", "--count", "0"}).code, cli::kExitUsage);
}

TEST(Cli, PreprocessWritesNormalisedVolumes) {
  const auto dir = test::scratch_dir();
  ASSERT_EQ(run_cli({"synth", "--count", "3", "--dims", "8x10x12", "--output-dir", (dir / "raw").string()}).code, 0);
  const auto r = run_cli({"preprocess", "--input-dir", (dir / "raw").string(), "--recipe", "brats",
                          "--pad-or-crop", "8", "--halvings", "0", "--output-dir", (dir / "pre").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto files = list_volumes(dir / "pre");
  ASSERT_EQ(files.size(), 3u);
  for (const auto& f : files) {
    const auto v = load_volume(f);
    EXPECT_EQ(v.dims(), (Dims3{8, 8, 8}));
    for (float x : v.data()) {
      EXPECT_GE(x, -1.0f);
      EXPECT_LE(x, 1.0f);
    }
  }
  const auto summary = read(dir / "pre" / "preprocess_summary.json");
  EXPECT_EQ(summary["count"], 3);
  EXPECT_EQ(summary["recipe"], "brats");
}

TEST(Cli, PreprocessUnknownRecipeAndEmptyDir) {
  const auto dir = test::scratch_dir();
  fs::create_directories(dir / "empty");
  EXPECT_EQ(run_cli({"preprocess", "--input-dir", (dir / "empty").string(), "--recipe", "mri"}).code,
            cli::kExitUsage);
  const auto r = run_cli({"preprocess", "--input-dir", (dir / "empty").string(), "--output-dir", (dir / "o").string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_FALSE(r.err.empty());
  EXPECT_EQ(read(dir / "o" / "preprocess_summary.json")["count"], 0);
}

TEST(Cli, RoundtripCheck) {
  const auto dir = test::scratch_dir();
  RngState rng(1);
  save_volume(test::uniform_volume({8, 6, 4}, rng, -10, 10), dir / "v");
  const auto r = run_cli({"roundtrip-check", "--volume", (dir / "v").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.last_json();
  EXPECT_LT(j["max_abs_error"].get<double>(), 1e-5);
  EXPECT_TRUE(j["pass"].get<bool>());
  save_volume(test::uniform_volume({8, 5, 4}, rng), dir / "odd");
  EXPECT_EQ(run_cli({"roundtrip-check", "--volume", (dir / "odd").string()}).code, cli::kExitCheckFailed);
}

TEST(Cli, FullScalePresetNeedsExplicitFlag) {
  const auto r = run_cli({"train", "--preset", "paper", "--output-dir", (test::scratch_dir() / "t").string()});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("allow-paper-preset"), std::string::npos);
}

std::vector<std::string> small_train(const fs::path& out, int iterations) {
  return {"train", "--seed", "5", "--schedule", "linear-100", "--iterations", std::to_string(iterations),
          "--batch-size", "2", "--synthetic-count", "4", "--dims", "8", "--base-channels", "4",
          "--checkpoint-every", "10", "--output-dir", out.string()};
}

TEST(Cli, TrainResumeReproducesUninterruptedRun) {
  const auto dir = test::scratch_dir();
  ASSERT_EQ(run_cli(small_train(dir / "full", 20)).code, 0);
  ASSERT_EQ(run_cli(small_train(dir / "part", 10)).code, 0);
  auto resume = small_train(dir / "part", 20);
  resume.push_back("--resume");
  resume.push_back((dir / "part" / "checkpoints" / "step-00000010").string());
  const auto r = run_cli(resume);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir / "full" / "loss.csv"), slurp(dir / "part" / "loss.csv"));
  const auto summary = read(dir / "full" / "train_summary.json");
  EXPECT_EQ(summary["iterations"], 20);
  EXPECT_TRUE(fs::exists(dir / "full" / "model.ckpt.json"));
  EXPECT_TRUE(fs::exists(dir / "full" / "config.json"));
}

TEST(Cli, ConfigFileSuppliesOptions) {
  const auto dir = test::scratch_dir();
  std::ofstream(dir / "cfg.json") << R"({"command": "synth", "count": 2, "dims": "4", "seed": 3})";
  const auto r = run_cli({"synth", "--config", (dir / "cfg.json").string(), "--output-dir", (dir / "s").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(list_volumes(dir / "s").size(), 2u);
  EXPECT_EQ(read(dir / "s" / "synth_config.json")["seed"], 3);
  std::ofstream(dir / "bad.json") << R"({"colour": 1})";
  EXPECT_EQ(run_cli({"synth", "--config", (dir / "bad.json").string()}).code, cli::kExitUsage);
}

TEST(Cli, AnalyticSamplingIsDeterministicAcrossThreads) {
  const auto dir = test::scratch_dir();
  auto args = [&](const std::string& name, const std::string& threads) {
    return std::vector<std::string>{"sample", "--analytic", "--schedule", "linear-50", "--count", "3", "--dims", "8",
                                    "--seed", "11", "--threads", threads, "--output-dir", (dir / name).string()};
  };
  ASSERT_EQ(run_cli(args("a", "1")).code, 0);
  ASSERT_EQ(run_cli(args("b", "3")).code, 0);
  for (int i = 0; i < 3; ++i) {
    const std::string base = "sample-000" + std::to_string(i) + ".v3r.raw";
    EXPECT_EQ(slurp(dir / "a" / base), slurp(dir / "b" / base));
  }
  const auto manifest = read(dir / "a" / "manifest.json");
  EXPECT_EQ(manifest["seed"], 11);
  EXPECT_EQ(manifest["stream_ids"], Json::array({1, 2, 3}));
  EXPECT_EQ(run_cli({"sample", "--count", "1"}).code, cli::kExitUsage);
}

TEST(Cli, SampleFromCheckpointRejectsShapeMismatch) {
  const auto dir = test::scratch_dir();
  ASSERT_EQ(run_cli(small_train(dir / "t", 2)).code, 0);
  const auto ckpt = (dir / "t" / "model").string();
  EXPECT_EQ(run_cli({"sample", "--checkpoint", ckpt, "--count", "1", "--output-dir", (dir / "s").string()}).code, 0);
  const auto r = run_cli({"sample", "--checkpoint", ckpt, "--dims", "16", "--output-dir", (dir / "s2").string()});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("shape mismatch"), std::string::npos);
}

TEST(Cli, EvalDiversityAndFrechet) {
  const auto dir = test::scratch_dir();
  RngState rng(2);
  const auto v = test::uniform_volume({12, 12, 12}, rng);
  fs::create_directories(dir / "same");
  for (int i = 0; i < 4; ++i) save_volume(v, dir / "same" / ("v" + std::to_string(i)));
  auto r = run_cli({"eval", "--mode", "diversity", "--samples-dir", (dir / "same").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(r.last_json()["value"].get<double>(), 1.0, 1e-12);

  std::ofstream(dir / "f.csv") << "a,b\n1,2\n3,5\n0,1\n";
  r = run_cli({"eval", "--mode", "frechet", "--features-a", (dir / "f.csv").string(), "--features-b",
               (dir / "f.csv").string(), "--output-dir", (dir / "e").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(r.last_json()["value"].get<double>(), 0.0, 1e-9);
  EXPECT_TRUE(read(dir / "e" / "eval.json").contains("config_hash"));

  std::ofstream(dir / "g.csv") << "a\n1\n2\n";
  r = run_cli({"eval", "--mode", "frechet", "--features-a", (dir / "f.csv").string(), "--features-b",
               (dir / "g.csv").string()});
  EXPECT_EQ(r.code, cli::kExitCheckFailed);
  EXPECT_NE(r.err.find("dimension mismatch"), std::string::npos);
}

TEST(Cli, BenchReportsThreeOps) {
  const auto r = run_cli({"bench", "--dims", "8", "--reps", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ops = r.last_json()["ops"];
  ASSERT_EQ(ops.size(), 3u);
  for (const auto& op : ops) EXPECT_GE(op["median_seconds"].get<double>(), 0.0);
}

TEST(Cli, PresetsListed) {
  const auto r = run_cli({"presets"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("brats"), std::string::npos);
  EXPECT_NE(r.out.find("lidc"), std::string::npos);
}

}  // namespace
}  // namespace wdm
