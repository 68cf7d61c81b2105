#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "wdm/rng.hpp"
#include "wdm/volume.hpp"

namespace wdm {

/// Gaussian summary of a feature set: mean and unbiased (n - 1) covariance.
struct FeatureStats {
  std::size_t n = 0;
  std::vector<double> mean;
  std::vector<double> cov;  // row-major dim x dim

  std::size_t dim() const noexcept { return mean.size(); }
  double cov_at(std::size_t i, std::size_t j) const noexcept { return cov[i * dim() + j]; }
};

/// Requires at least two vectors of equal dimension. The covariance is
/// symmetrised by averaging with its transpose.
FeatureStats feature_stats(std::span<const std::vector<double>> features);

/// ||mu_a - mu_b||^2 + tr(S_a + S_b - 2 (S_a S_b)^(1/2)), the square root
/// taken through the symmetric matrix S_a^(1/2) S_b S_a^(1/2). Tiny negative
/// eigenvalues are clamped to zero; the result is clamped at zero.
double frechet_distance(const FeatureStats& a, const FeatureStats& b);

struct MsSsimConfig {
  std::size_t window_size = 11;
  double window_sigma = 1.5;
  std::vector<double> scale_weights{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  double k1 = 0.01;
  double k2 = 0.03;
  double data_range = 2.0;

  void validate() const;
  /// Largest S <= scale_weights.size() with min_dim / 2^(S-1) >= window_size.
  std::size_t usable_scales(const Dims3& dims) const;
};

struct SsimComponents {
  double luminance = 0.0;
  double contrast_structure = 0.0;
};

/// Gaussian-windowed 3D SSIM terms averaged over the valid (unpadded) positions.
SsimComponents ssim_single_scale(const Volume3& a, const Volume3& b, const MsSsimConfig& cfg = {});

/// Multi-scale SSIM: product of contrast-structure terms over scales and the
/// luminance term at the coarsest scale, each raised to its (renormalised)
/// weight. Negative terms are clamped to zero before exponentiation.
double ms_ssim(const Volume3& a, const Volume3& b, const MsSsimConfig& cfg = {});

/// Mean ms_ssim over disjoint random pairs of the shuffled samples (odd
/// leftover dropped). Pairs are evaluated on up to `threads` workers; the
/// mean is a fixed-order pairwise sum so the value does not depend on it.
double diversity_ms_ssim(std::span<const Volume3> samples, RngState& rng, const MsSsimConfig& cfg = {},
                         unsigned threads = 1);

/// Pairwise (tree) summation in index order.
double pairwise_sum(std::span<const double> values) noexcept;

/// Placeholder features for end-to-end runs without a pretrained network:
/// global mean, variance, and mean squared forward difference along D, H, W.
std::vector<double> toy_features(const Volume3& volume);

/// CSV with a header row naming each column; every row must have as many
/// values as the header.
std::vector<std::vector<double>> read_feature_csv(const std::filesystem::path& path);
void write_feature_csv(const std::filesystem::path& path, std::span<const std::vector<double>> features);

}  // namespace wdm
