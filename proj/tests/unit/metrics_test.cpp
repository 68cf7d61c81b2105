#include <cmath>
#include <fstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "test_util.hpp"
#include "wdm/error.hpp"
#include "wdm/metrics.hpp"

namespace wdm {
namespace {

using Features = std::vector<std::vector<double>>;

Features gaussian_features(std::size_t n, const std::vector<double>& sd, RngState& rng) {
  Features out(n, std::vector<double>(sd.size()));
  for (auto& f : out) {
    rng.fill_normal(f);
    for (std::size_t k = 0; k < sd.size(); ++k) f[k] *= sd[k];
  }
  return out;
}

TEST(FeatureStats, TwoPointExample) {
  const Features f = {{0.0, 0.0}, {2.0, 2.0}};
  const auto s = feature_stats(f);
  EXPECT_EQ(s.n, 2u);
  EXPECT_DOUBLE_EQ(s.mean[0], 1.0);
  EXPECT_DOUBLE_EQ(s.mean[1], 1.0);
  for (double c : s.cov) EXPECT_DOUBLE_EQ(c, 2.0);
}

TEST(FeatureStats, IdenticalVectorsHaveZeroCovariance) {
  const Features f(5, std::vector<double>{1.5, -2.0, 3.0});
  for (double c : feature_stats(f).cov) EXPECT_EQ(c, 0.0);
}

TEST(FeatureStats, PermutationInvariant) {
  RngState rng(1);
  auto f = gaussian_features(50, {1.0, 2.0, 0.5}, rng);
  const auto a = feature_stats(f);
  std::reverse(f.begin(), f.end());
  const auto b = feature_stats(f);
  for (std::size_t i = 0; i < a.cov.size(); ++i) EXPECT_NEAR(a.cov[i], b.cov[i], 1e-12);
  for (std::size_t i = 0; i < a.mean.size(); ++i) EXPECT_NEAR(a.mean[i], b.mean[i], 1e-12);
}

TEST(FeatureStats, Errors) {
  EXPECT_THROW(feature_stats(Features{{1.0}}), InvalidArgument);
  EXPECT_THROW(feature_stats(Features{{1.0, 2.0}, {1.0}}), InvalidArgument);
}

FeatureStats diag_stats(std::vector<double> mean, std::vector<double> var) {
  FeatureStats s;
  s.n = 10;
  const std::size_t d = mean.size();
  s.mean = std::move(mean);
  s.cov.assign(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) s.cov[i * d + i] = var[i];
  return s;
}

TEST(Frechet, IdenticalStatsGiveZero) {
  RngState rng(2);
  const auto s = feature_stats(gaussian_features(40, {1.0, 3.0, 0.2, 1.0}, rng));
  EXPECT_NEAR(frechet_distance(s, s), 0.0, 1e-9);
}

TEST(Frechet, ScalarCase) {
  // (1 - 0)^2 + 1 + 4 - 2 * sqrt(4) = 2
  EXPECT_NEAR(frechet_distance(diag_stats({0.0}, {1.0}), diag_stats({1.0}, {4.0})), 2.0, 1e-12);
  EXPECT_NEAR(frechet_distance(diag_stats({0.0}, {1.0}), diag_stats({1.0}, {1.0})), 1.0, 1e-12);
}

TEST(Frechet, DiagonalMatchesOracle) {
  const std::vector<double> ma{0.0, 1.0, -2.0}, va{1.0, 4.0, 0.25};
  const std::vector<double> mb{0.5, 1.0, 0.0}, vb{4.0, 1.0, 9.0};
  const double expected = oracle::diagonal_frechet(ma, va, mb, vb);
  EXPECT_NEAR(frechet_distance(diag_stats(ma, va), diag_stats(mb, vb)), expected, 1e-10);
  EXPECT_NEAR(frechet_distance(diag_stats({0, 0}, {1, 4}), diag_stats({0, 0}, {4, 1})), 2.0, 1e-12);
}

TEST(Frechet, RotationInvariantForFullCovariance) {
  // Rotating both distributions by the same orthogonal matrix leaves the distance unchanged.
  const double c = std::cos(0.7), s = std::sin(0.7);
  auto rotate = [&](const std::vector<double>& var, std::vector<double> mean) {
    FeatureStats st;
    st.n = 10;
    st.mean = {c * mean[0] - s * mean[1], s * mean[0] + c * mean[1]};
    // R diag(var) R^T
    st.cov = {c * c * var[0] + s * s * var[1], c * s * (var[0] - var[1]),
              c * s * (var[0] - var[1]), s * s * var[0] + c * c * var[1]};
    return st;
  };
  const double expected = oracle::diagonal_frechet({1, 2}, {1, 4}, {0, -1}, {9, 0.5});
  EXPECT_NEAR(frechet_distance(rotate({1, 4}, {1, 2}), rotate({9, 0.5}, {0, -1})), expected, 1e-9);
}

TEST(Frechet, Symmetric) {
  RngState rng(3);
  const auto a = feature_stats(gaussian_features(30, {1.0, 2.0, 0.5}, rng));
  const auto b = feature_stats(gaussian_features(30, {0.3, 1.0, 2.0}, rng));
  const double ab = frechet_distance(a, b), ba = frechet_distance(b, a);
  EXPECT_GT(ab, 0.0);
  EXPECT_NEAR(ab, ba, 1e-9 * ab);
}

TEST(Frechet, HalvesOfOneSampleAreClose) {
  RngState rng(4);
  const auto f = gaussian_features(10000, {1.0, 1.0, 1.0, 1.0}, rng);
  const std::span<const std::vector<double>> all(f);
  const double d = frechet_distance(feature_stats(all.first(5000)), feature_stats(all.last(5000)));
  EXPECT_LT(d, 0.05);
}

TEST(Frechet, DimensionMismatchThrows) {
  EXPECT_THROW(frechet_distance(diag_stats({0}, {1}), diag_stats({0, 0}, {1, 1})), InvalidArgument);
}

// Brute-force single-scale SSIM over valid window positions.
SsimComponents ssim_oracle(const Volume3& a, const Volume3& b, const MsSsimConfig& cfg) {
  const std::size_t k = cfg.window_size;
  std::vector<double> g(k);
  double gs = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double x = static_cast<double>(i) - static_cast<double>(k - 1) / 2.0;
    g[i] = std::exp(-x * x / (2 * cfg.window_sigma * cfg.window_sigma));
    gs += g[i];
  }
  for (double& v : g) v /= gs;
  const double c1 = std::pow(cfg.k1 * cfg.data_range, 2), c2 = std::pow(cfg.k2 * cfg.data_range, 2);
  const Dims3 d = a.dims();
  double lum = 0.0, cs = 0.0;
  std::size_t count = 0;
  for (std::size_t z = 0; z + k <= d.d; ++z)
    for (std::size_t y = 0; y + k <= d.h; ++y)
      for (std::size_t x = 0; x + k <= d.w; ++x) {
        double ma = 0, mb = 0, aa = 0, bb = 0, ab = 0;
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t j = 0; j < k; ++j)
            for (std::size_t l = 0; l < k; ++l) {
              const double w = g[i] * g[j] * g[l];
              const double va = a.at(z + i, y + j, x + l), vb = b.at(z + i, y + j, x + l);
              ma += w * va;
              mb += w * vb;
              aa += w * va * va;
              bb += w * vb * vb;
              ab += w * va * vb;
            }
        lum += (2 * ma * mb + c1) / (ma * ma + mb * mb + c1);
        cs += (2 * (ab - ma * mb) + c2) / (aa - ma * ma + bb - mb * mb + c2);
        ++count;
      }
  return {lum / count, cs / count};
}

TEST(Ssim, SingleScaleMatchesBruteForce) {
  RngState rng(5);
  const auto a = test::uniform_volume({12, 13, 14}, rng);
  const auto b = test::uniform_volume({12, 13, 14}, rng, -0.5, 1.0);
  const MsSsimConfig cfg;
  const auto got = ssim_single_scale(a, b, cfg);
  const auto want = ssim_oracle(a, b, cfg);
  EXPECT_NEAR(got.luminance, want.luminance, 1e-10);
  EXPECT_NEAR(got.contrast_structure, want.contrast_structure, 1e-10);
}

TEST(Ssim, ConstantVolumesLuminanceClosedForm) {
  const Volume3 a({12, 12, 12}, {}, 0.5f), b({12, 12, 12}, {}, -0.25f);
  const MsSsimConfig cfg;
  const double c1 = std::pow(cfg.k1 * cfg.data_range, 2);
  const auto s = ssim_single_scale(a, b, cfg);
  EXPECT_NEAR(s.luminance, (2 * 0.5 * -0.25 + c1) / (0.25 + 0.0625 + c1), 1e-12);
  EXPECT_NEAR(s.contrast_structure, 1.0, 1e-9);
}

TEST(Ssim, ComponentRanges) {
  RngState rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const auto a = test::uniform_volume({12, 12, 12}, rng, 0.0, 1.0);
    const auto b = test::uniform_volume({12, 12, 12}, rng, 0.0, 1.0);
    const auto s = ssim_single_scale(a, b);
    EXPECT_GE(s.luminance, 0.0);
    EXPECT_LE(s.luminance, 1.0);
    EXPECT_GE(s.contrast_structure, -1.0);
    EXPECT_LE(s.contrast_structure, 1.0);
  }
}

TEST(Ssim, AnticorrelatedNonNegativeInputsGiveNegativeContrastStructure) {
  RngState rng(7);
  const auto a = test::uniform_volume({12, 12, 12}, rng, 0.0, 1.0);
  Volume3 b(a.dims());
  for (std::size_t i = 0; i < a.size(); ++i) b.data()[i] = 1.0f - a.data()[i];
  EXPECT_LT(ssim_single_scale(a, b).contrast_structure, 0.0);
  EXPECT_EQ(ms_ssim(a, b), 0.0);
}

TEST(MsSsim, SelfSimilarityIsOne) {
  RngState rng(8);
  const auto a = test::uniform_volume({24, 24, 24}, rng);
  EXPECT_NEAR(ms_ssim(a, a), 1.0, 1e-12);
}

TEST(MsSsim, DecreasesWithNoise) {
  RngState rng(9);
  const auto a = test::uniform_volume({24, 24, 24}, rng);
  std::vector<float> noise(a.size());
  rng.fill_normal(noise);
  double prev = 1.0;
  for (double sigma : {0.05, 0.2, 0.5, 1.0}) {
    Volume3 b = a;
    for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] += static_cast<float>(sigma * noise[i]);
    const double v = ms_ssim(a, b);
    EXPECT_LT(v, prev) << sigma;
    EXPECT_GE(v, 0.0);
    prev = v;
  }
}

TEST(MsSsim, SymmetricBitwise) {
  RngState rng(10);
  const auto a = test::uniform_volume({24, 22, 26}, rng);
  const auto b = test::uniform_volume({24, 22, 26}, rng);
  EXPECT_EQ(ms_ssim(a, b), ms_ssim(b, a));
}

Volume3 pool2(const Volume3& v) {
  const Dims3 d{v.dims().d / 2, v.dims().h / 2, v.dims().w / 2};
  Volume3 out(d);
  for (std::size_t z = 0; z < d.d; ++z)
    for (std::size_t y = 0; y < d.h; ++y)
      for (std::size_t x = 0; x < d.w; ++x) {
        double s = 0;
        for (std::size_t k = 0; k < 8; ++k) s += v.at(2 * z + (k >> 2), 2 * y + ((k >> 1) & 1), 2 * x + (k & 1));
        out.at(z, y, x) = static_cast<float>(s / 8.0);
      }
  return out;
}

TEST(MsSsim, TwoScalesComposeFromSingleScale) {
  RngState rng(11);
  const auto a = test::uniform_volume({23, 22, 25}, rng);
  Volume3 b = a;
  std::vector<float> noise(a.size());
  rng.fill_normal(noise);
  for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] += 0.3f * noise[i];
  const MsSsimConfig cfg;
  ASSERT_EQ(cfg.usable_scales(a.dims()), 2u);
  const auto s0 = ssim_single_scale(a, b, cfg);
  const auto s1 = ssim_single_scale(pool2(a), pool2(b), cfg);
  const double w0 = cfg.scale_weights[0], w1 = cfg.scale_weights[1], sum = w0 + w1;
  const double want = std::pow(s0.contrast_structure, w0 / sum) *
                      std::pow(s1.contrast_structure * s1.luminance, w1 / sum);
  EXPECT_NEAR(ms_ssim(a, b, cfg), want, 1e-6);
}

TEST(MsSsim, ScaleCountAndErrors) {
  const MsSsimConfig cfg;
  EXPECT_EQ(cfg.usable_scales({11, 11, 11}), 1u);
  EXPECT_EQ(cfg.usable_scales({22, 40, 40}), 2u);
  EXPECT_EQ(cfg.usable_scales({176, 176, 176}), 5u);
  EXPECT_EQ(cfg.usable_scales({10, 64, 64}), 0u);
  const Volume3 small({10, 16, 16});
  EXPECT_THROW(ms_ssim(small, small), InvalidArgument);
  EXPECT_THROW(ms_ssim(Volume3({12, 12, 12}), Volume3({12, 12, 13})), InvalidArgument);
  MsSsimConfig bad;
  bad.window_size = 10;
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(Diversity, IdenticalSamplesGiveOne) {
  RngState rng(12);
  const auto v = test::uniform_volume({16, 16, 16}, rng);
  const std::vector<Volume3> samples(4, v);
  RngState pick(0);
  EXPECT_NEAR(diversity_ms_ssim(samples, pick), 1.0, 1e-12);
}

TEST(Diversity, IndependentNoiseIsLowAndReproducible) {
  RngState rng(13);
  std::vector<Volume3> samples;
  for (int i = 0; i < 6; ++i) samples.push_back(test::uniform_volume({16, 16, 16}, rng));
  RngState p1(21), p2(21), p3(21);
  const double a = diversity_ms_ssim(samples, p1, {}, 1);
  const double b = diversity_ms_ssim(samples, p2, {}, 3);
  EXPECT_LT(a, 0.2);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, diversity_ms_ssim(samples, p3));
  RngState one(0);
  EXPECT_THROW(diversity_ms_ssim(std::span<const Volume3>(samples).first(1), one), InvalidArgument);
}

TEST(PairwiseSum, MatchesNaiveOnIntegers) {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  EXPECT_EQ(pairwise_sum(v), 999.0 * 1000.0 / 2.0);
  EXPECT_EQ(pairwise_sum({}), 0.0);
}

TEST(FeatureCsv, Roundtrip) {
  const Features f = {{1.0, 0.1, -3.25e-7}, {2.0, 1.0 / 3.0, 5.0}};
  const auto path = test::scratch_dir() / "f.csv";
  write_feature_csv(path, f);
  EXPECT_EQ(read_feature_csv(path), f);
}

TEST(FeatureCsv, RowWidthMismatchNamesTheRow) {
  const auto path = test::scratch_dir() / "bad.csv";
  std::ofstream(path) << "a,b\n1,2\n3\n";
  try {
    read_feature_csv(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("dimension mismatch"), std::string::npos);
  }
  std::ofstream(path) << "a,b\n1,x\n";
  EXPECT_THROW(read_feature_csv(path), Error);
}

TEST(ToyFeatures, ConstantVolume) {
  const auto f = toy_features(Volume3({4, 4, 4}, {}, 2.0f));
  ASSERT_EQ(f.size(), 5u);
  EXPECT_DOUBLE_EQ(f[0], 2.0);
  for (std::size_t i = 1; i < f.size(); ++i) EXPECT_DOUBLE_EQ(f[i], 0.0);
}

}  // namespace
}  // namespace wdm
