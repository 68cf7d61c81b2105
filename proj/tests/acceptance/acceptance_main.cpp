// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: wdm_acceptance <work-dir>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "grad_check.hpp"
#include "oracles.hpp"
#include "wdm/denoiser.hpp"
#include "wdm/diffusion.hpp"
#include "wdm/metrics.hpp"
#include "wdm/rng.hpp"
#include "wdm/schedule.hpp"
#include "wdm/volume_io.hpp"
#include "wdm/wavelet.hpp"

namespace fs = std::filesystem;
using namespace wdm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int run_cli(std::vector<std::string> args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (out) *out = o.str();
  if (code != 0) std::cerr << "  command failed (" << code << "): " << e.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Volume3 random_volume(Dims3 dims, RngState& rng, double lo, double hi) {
  Volume3 v(dims);
  for (float& x : v.data()) x = static_cast<float>(lo + (hi - lo) * rng.uniform());
  return v;
}

// 1 and 2 share the corpus; both are evaluated in one pass.
struct WaveletStats {
  double worst_recon = 0.0;
  double worst_energy = 0.0;
  double seconds = 0.0;
};

WaveletStats wavelet_corpus() {
  WaveletStats s;
  const auto t0 = Clock::now();
  RngState rng(2024, 7);
  for (std::size_t n : {4u, 16u, 32u, 64u}) {
    for (int i = 0; i < 100; ++i) {
      const auto y = random_volume({n, n, n}, rng, -10.0, 10.0);
      const auto c = dwt3(y);
      const auto back = idwt3(c);
      double e_y = 0.0, e_c = 0.0;
      for (std::size_t k = 0; k < y.size(); ++k) {
        s.worst_recon = std::max(s.worst_recon, static_cast<double>(std::abs(back.data()[k] - y.data()[k])));
        e_y += static_cast<double>(y.data()[k]) * y.data()[k];
        e_c += static_cast<double>(c.data()[k]) * c.data()[k];
      }
      s.worst_energy = std::max(s.worst_energy, std::abs(e_c - e_y) / e_y);
    }
  }
  s.seconds = seconds_since(t0);
  return s;
}

Outcome ac1(const WaveletStats& s) {
  return {s.worst_recon < 1e-5 && s.seconds < 30.0,
          fmt("max-abs reconstruction error %.3g over 400 volumes (< 1e-5), %.2f s (< 30 s)", s.worst_recon,
              s.seconds)};
}

Outcome ac2(const WaveletStats& s) {
  RngState rng(2024, 8);
  double worst_oracle = 0.0;
  for (std::size_t n : {4u, 8u}) {
    const auto y = random_volume({n, n, n}, rng, -10.0, 10.0);
    const std::vector<double> yd(y.data().begin(), y.data().end());
    const auto want = oracle::haar_dwt3(yd, n, n, n);
    const auto got = dwt3(y);
    for (std::size_t k = 0; k < want.size(); ++k) {
      worst_oracle = std::max(worst_oracle, std::abs(static_cast<double>(got.data()[k]) - want[k]));
    }
  }
  return {s.worst_energy < 1e-5 && worst_oracle < 1e-6,
          fmt("relative energy error %.3g (< 1e-5); brute-force oracle max-abs %.3g on 4^3, 8^3 (< 1e-6)",
              s.worst_energy, worst_oracle)};
}

Outcome ac3() {
  const auto t0 = Clock::now();
  const auto schedule = NoiseSchedule::from_spec(schedule_preset("linear-1000"));
  const auto ref = oracle::linear_schedule(1000, 1e-4, 0.02);
  RngState rng(3);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const int t = i == 0 ? 1 : 1 + static_cast<int>(rng.uniform_index(1000));
    const double x_t = 6.0 * rng.uniform() - 3.0;
    const double x0 = 2.0 * rng.uniform() - 1.0;
    const auto want = oracle::conjugate_posterior(ref, t, x_t, x0);
    worst = std::max(worst, oracle::relative_error(posterior_mean(x_t, x0, t, schedule), want.mean, 1e-300));
    worst = std::max(worst, oracle::relative_error(posterior_variance(t, schedule), want.var, 1e-300));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-10 && secs < 1.0,
          fmt("worst relative error %.3g over 50 (t, x_t, x0) triples (< 1e-10), %.3f s (< 1 s)", worst, secs)};
}

struct ChainStats {
  double mean = 0.0;
  double sd = 0.0;
  double seconds = 0.0;
  double quadrature_err = 0.0;
};

ChainStats run_chains(int T) {
  const double mu0 = 0.3, var0 = 0.25;
  const auto t0 = Clock::now();
  ChainStats s;
  const auto schedule = NoiseSchedule::linear(T, 1e-4, 0.02);
  for (int t : {1, T / 4, T / 2, T}) {
    for (double x_t : {-2.0, 0.0, 0.7, 2.5}) {
      const double ab = schedule.alpha_bar(std::max(t, 1));
      const double q = oracle::posterior_mean_quadrature(x_t, ab, mu0, var0);
      s.quadrature_err = std::max(s.quadrature_err, std::abs(analytic_posterior_mean(x_t, ab, mu0, var0) - q));
    }
  }
  AnalyticGaussianDenoiser den(mu0, var0, schedule);
  RngState rng(4, 1);
  const auto c = sample_coefficients(den, Dims3{1250, 1, 1}, schedule, rng);
  double sum = 0.0, sq = 0.0;
  for (float v : c.data()) sum += v;
  const double n = static_cast<double>(c.size());
  s.mean = sum / n;
  for (float v : c.data()) sq += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(sq / (n - 1.0));
  s.seconds = seconds_since(t0);
  return s;
}

Outcome ac4() {
  const auto s = run_chains(100);
  const auto ref = run_chains(1000);
  const bool ok = s.quadrature_err < 1e-8 && std::abs(s.mean - 0.3) <= 0.015 && s.sd >= 0.49 && s.sd <= 0.51 &&
                  s.seconds < 120.0;
  return {ok, fmt("T=100, 10000 chains: mean %.4f (0.3 +- 0.015), std %.4f ([0.49, 0.51]); quadrature check "
                  "%.2g; %.2f s. With T=1000: mean %.4f, std %.4f",
                  s.mean, s.sd, s.quadrature_err, s.seconds, ref.mean, ref.sd)};
}

Outcome ac5() {
  const auto t0 = Clock::now();
  const auto base = test::check_gradients(NetConfig{8, 32, false}, {4, 4, 4}, 51, 250);
  const auto variant = test::check_gradients(NetConfig{8, 32, true}, {4, 4, 4}, 52, 750);
  const double adjoint = test::check_transform_adjoint({8, 8, 8}, 3, 53);
  const double worst = std::max({base.worst_param_rel, base.worst_input_rel, variant.worst_param_rel,
                                 variant.worst_input_rel, adjoint});
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 60.0,
          fmt("worst relative error %.3g over %zu + %zu checked values (< 1e-4; worst at %s), transform adjoint "
              "%.3g, %.1f s (< 60 s)",
              worst, base.checked, variant.checked,
              (variant.worst_param_rel > base.worst_param_rel ? variant.worst_param : base.worst_param).c_str(),
              adjoint, secs)};
}

std::vector<double> read_losses(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<double> out;
  while (std::getline(in, line)) {
    // columns: iteration, t_mean, loss
    out.push_back(std::stod(line.substr(line.rfind(',') + 1)));
  }
  return out;
}

Outcome ac6(const fs::path& work) {
  const auto t0 = Clock::now();
  const auto dir = work / "ac6";
  if (run_cli({"train", "--preset", "desk", "--iterations", "200", "--dims", "16", "--seed", "6", "--output-dir",
               dir.string()}) != 0) {
    return {false, "train command failed"};
  }
  const double secs = seconds_since(t0);
  const auto loss = read_losses(dir / "loss.csv");
  if (loss.size() != 200) return {false, fmt("loss.csv has %zu rows, expected 200", loss.size())};
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 50; ++i) {
    first += loss[i] / 50.0;
    last += loss[150 + i] / 50.0;
  }
  return {last < first && secs < 300.0,
          fmt("mean loss steps 151-200 %.4g vs steps 1-50 %.4g, %.1f s (< 300 s)", last, first, secs)};
}

Outcome ac7() {
  const auto s = NoiseSchedule::from_spec(schedule_preset("linear-1000"));
  const auto ref = oracle::linear_schedule(1000, 1e-4, 0.02);
  double worst = 0.0;
  for (int t = 1; t <= 1000; ++t) worst = std::max(worst, oracle::relative_error(s.alpha_bar(t), ref.alpha_bar[t], 0));
  const bool exact = s.alpha_bar(1) == 0.9999;
  return {exact && worst < 1e-12,
          fmt("alpha_bar_1 %s 0.9999 exactly; worst table relative error %.3g (< 1e-12)", exact ? "==" : "!=",
              worst)};
}

FeatureStats diag(std::vector<double> mean, const std::vector<double>& var) {
  FeatureStats s;
  s.n = 2;
  const std::size_t d = mean.size();
  s.mean = std::move(mean);
  s.cov.assign(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) s.cov[i * d + i] = var[i];
  return s;
}

Outcome ac8() {
  RngState rng(8);
  std::vector<std::vector<double>> f(200, std::vector<double>(6));
  for (auto& v : f) rng.fill_normal(v);
  const auto st = feature_stats(f);
  const double self = frechet_distance(st, st);
  const std::vector<double> ma{0.0, 1.0, 2.0, -1.0}, va{1.0, 4.0, 0.5, 2.0};
  const std::vector<double> mb{0.5, -1.0, 2.0, 0.0}, vb{9.0, 1.0, 0.5, 0.1};
  const double got = frechet_distance(diag(ma, va), diag(mb, vb));
  const double want = oracle::diagonal_frechet(ma, va, mb, vb);
  const double scalar = frechet_distance(diag({0.0}, {1.0}), diag({1.0}, {1.0}));
  const bool ok = std::abs(self) < 1e-8 && std::abs(got - want) < 1e-8 && std::abs(scalar - 1.0) <= 1e-9;
  return {ok, fmt("identical %.3g (< 1e-8); diagonal %.12g vs oracle %.12g; scalar %.12g (1 +- 1e-9)", self, got,
                  want, scalar)};
}

Outcome ac9() {
  RngState rng(9);
  const auto x = random_volume({24, 24, 24}, rng, -1.0, 1.0);
  const double self = ms_ssim(x, x);
  std::vector<float> noise(x.size());
  rng.fill_normal(noise);
  std::vector<double> noisy;
  for (double sigma : {0.01, 0.1, 0.5}) {
    Volume3 y = x;
    for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] += static_cast<float>(sigma * noise[i]);
    noisy.push_back(ms_ssim(x, y));
  }
  const bool monotone = noisy[0] > noisy[1] && noisy[1] > noisy[2] && noisy[0] < self;
  const std::vector<Volume3> same(64, random_volume({16, 16, 16}, rng, -1.0, 1.0));
  std::vector<Volume3> independent;
  for (int i = 0; i < 64; ++i) independent.push_back(random_volume({16, 16, 16}, rng, -1.0, 1.0));
  RngState p1(0), p2(0);
  const double d_same = diversity_ms_ssim(same, p1);
  const double d_indep = diversity_ms_ssim(independent, p2);
  const bool ok = std::abs(self - 1.0) <= 1e-6 && monotone && std::abs(d_same - 1.0) <= 1e-6 && d_indep < 0.2;
  return {ok, fmt("self %.8f; noise 0.01/0.1/0.5 -> %.4f > %.4f > %.4f; diversity identical %.6f, independent "
                  "%.4f (< 0.2)",
                  self, noisy[0], noisy[1], noisy[2], d_same, d_indep)};
}

Outcome ac10(const fs::path& work) {
  const auto dir = work / "ac10";
  const auto model = dir / "train";
  if (run_cli({"train", "--iterations", "5", "--dims", "8", "--synthetic-count", "4", "--schedule", "linear-100",
               "--output-dir", model.string()}) != 0) {
    return {false, "train command failed"};
  }
  bool ok = true;
  std::size_t compared = 0;
  for (const std::string threads : {"1", "4"}) {
    for (const std::string run : {"a", "b"}) {
      const auto out = dir / (threads + run);
      if (run_cli({"sample", "--checkpoint", (model / "model").string(), "--count", "4", "--seed", "10",
                   "--threads", threads, "--output-dir", out.string()}) != 0) {
        return {false, "sample command failed"};
      }
    }
  }
  for (int i = 0; i < 4; ++i) {
    const std::string name = fmt("sample-%04d.v3r.raw", i);
    const auto ref = slurp(dir / "1a" / name);
    for (const char* other : {"1b", "4a", "4b"}) {
      ok = ok && !ref.empty() && slurp(dir / other / name) == ref;
      ++compared;
    }
  }
  return {ok, fmt("%zu volume files compared against the first 1-thread run: %s", compared,
                  ok ? "bitwise identical" : "differ")};
}

Outcome ac11(const fs::path& work) {
  const auto t0 = Clock::now();
  const auto dir = work / "ac11";
  const auto seed = std::string("11");
  if (run_cli({"synth", "--count", "16", "--dims", "32", "--seed", seed, "--output-dir", (dir / "raw").string()}) ||
      run_cli({"preprocess", "--input-dir", (dir / "raw").string(), "--recipe", "brats", "--pad-or-crop", "32",
               "--halvings", "1", "--output-dir", (dir / "pre").string()}) ||
      run_cli({"train", "--dataset-dir", (dir / "pre").string(), "--iterations", "200", "--seed", seed,
               "--output-dir", (dir / "train").string()}) ||
      run_cli({"sample", "--checkpoint", (dir / "train" / "model").string(), "--count", "4", "--seed", seed,
               "--output-dir", (dir / "samples").string()})) {
    return {false, "pipeline command failed"};
  }
  std::string out;
  if (run_cli({"eval", "--mode", "diversity", "--samples-dir", (dir / "samples").string(), "--seed", seed}, &out)) {
    return {false, "eval command failed"};
  }
  const auto json_start = out.rfind('{');
  const auto value_at = out.find("\"value\":", json_start);
  const double diversity = std::stod(out.substr(value_at + 8));
  bool dims_ok = true;
  for (const auto& f : list_volumes(dir / "samples")) {
    const auto v = load_volume(f);
    dims_ok = dims_ok && v.dims() == Dims3{16, 16, 16} && v.all_finite();
  }
  const double secs = seconds_since(t0);
  return {dims_ok && diversity < 1.0 && secs < 600.0,
          fmt("4 samples of 16^3 %s; diversity %.6f (< 1.0); %.1f s (< 600 s)",
              dims_ok ? "finite with expected dims" : "FAILED checks", diversity, secs)};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "wdm_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  const auto wavelet = wavelet_corpus();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AC1", [&] { return ac1(wavelet); }},
      {"AC2", [&] { return ac2(wavelet); }},
      {"AC3", ac3},
      {"AC4", ac4},
      {"AC5", ac5},
      {"AC6", [&] { return ac6(work); }},
      {"AC7", ac7},
      {"AC8", ac8},
      {"AC9", ac9},
      {"AC10", [&] { return ac10(work); }},
      {"AC11", [&] { return ac11(work); }},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome r;
    try {
      r = check();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    failed += r.pass ? 0 : 1;
    std::cout << name << (r.pass ? " PASS: " : " FAIL: ") << r.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
