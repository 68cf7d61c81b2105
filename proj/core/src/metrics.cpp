#include "wdm/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "wdm/error.hpp"
#include "wdm/parallel.hpp"

namespace wdm {

namespace {

using Matrix = Eigen::MatrixXd;

Matrix to_matrix(const FeatureStats& s) {
  const auto d = static_cast<Eigen::Index>(s.dim());
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      m(i, j) = s.cov_at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  }
  return m;
}

// Eigenvalues of a symmetric matrix with small negatives clamped to zero.
Eigen::SelfAdjointEigenSolver<Matrix> eigensolve(const Matrix& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) {
    throw NumericError(std::string("eigendecomposition failed for ") + what);
  }
  return es;
}

double clamp_eigenvalue(double lambda, double scale, const char* what) {
  if (lambda >= 0.0) return lambda;
  if (-lambda <= 1e-9 * std::max(1.0, scale)) return 0.0;
  throw InvalidArgument(std::string(what) + " is not positive semi-definite (eigenvalue " +
                        std::to_string(lambda) + ")");
}

Matrix psd_sqrt(const Matrix& m, const char* what) {
  const auto es = eigensolve(m, what);
  Eigen::VectorXd ev = es.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = std::sqrt(clamp_eigenvalue(ev(i), scale, what));
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

std::vector<double> gaussian_window(const MsSsimConfig& cfg) {
  std::vector<double> g(cfg.window_size);
  const double r = static_cast<double>(cfg.window_size - 1) / 2.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double x = static_cast<double>(k) - r;
    g[k] = std::exp(-x * x / (2.0 * cfg.window_sigma * cfg.window_sigma));
    sum += g[k];
  }
  for (double& v : g) v /= sum;
  return g;
}

// Valid-mode separable filtering of a D-major field along W, then H, then D.
std::vector<double> filter_valid(const std::vector<double>& in, Dims3 dims, const std::vector<double>& g) {
  const std::size_t k = g.size();
  const Dims3 o{dims.d - k + 1, dims.h - k + 1, dims.w - k + 1};
  std::vector<double> a(dims.d * dims.h * o.w);
  for (std::size_t d = 0; d < dims.d; ++d) {
    for (std::size_t h = 0; h < dims.h; ++h) {
      const double* src = in.data() + (d * dims.h + h) * dims.w;
      double* dst = a.data() + (d * dims.h + h) * o.w;
      for (std::size_t w = 0; w < o.w; ++w) {
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) s += g[j] * src[w + j];
        dst[w] = s;
      }
    }
  }
  std::vector<double> b(dims.d * o.h * o.w);
  for (std::size_t d = 0; d < dims.d; ++d) {
    for (std::size_t h = 0; h < o.h; ++h) {
      double* dst = b.data() + (d * o.h + h) * o.w;
      for (std::size_t w = 0; w < o.w; ++w) dst[w] = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double* src = a.data() + (d * dims.h + h + j) * o.w;
        for (std::size_t w = 0; w < o.w; ++w) dst[w] += g[j] * src[w];
      }
    }
  }
  std::vector<double> c(o.voxels(), 0.0);
  const std::size_t plane = o.h * o.w;
  for (std::size_t d = 0; d < o.d; ++d) {
    double* dst = c.data() + d * plane;
    for (std::size_t j = 0; j < k; ++j) {
      const double* src = b.data() + (d + j) * plane;
      for (std::size_t i = 0; i < plane; ++i) dst[i] += g[j] * src[i];
    }
  }
  return c;
}

Volume3 trim_even(const Volume3& v) {
  const Dims3& d = v.dims();
  const Dims3 e{d.d - d.d % 2, d.h - d.h % 2, d.w - d.w % 2};
  if (e == d) return v;
  Volume3 out(e, v.spacing());
  for (std::size_t z = 0; z < e.d; ++z) {
    for (std::size_t y = 0; y < e.h; ++y) {
      for (std::size_t x = 0; x < e.w; ++x) out.at(z, y, x) = v.at(z, y, x);
    }
  }
  return out;
}

Volume3 downsample_for_scale(const Volume3& v) {
  const Volume3 e = trim_even(v);
  const Dims3& d = e.dims();
  Volume3 out(d.halved(), e.spacing());
  for (std::size_t z = 0; z < d.d / 2; ++z) {
    for (std::size_t y = 0; y < d.h / 2; ++y) {
      for (std::size_t x = 0; x < d.w / 2; ++x) {
        double s = 0.0;
        for (std::size_t i = 0; i < 2; ++i)
          for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t k = 0; k < 2; ++k) s += e.at(2 * z + i, 2 * y + j, 2 * x + k);
        out.at(z, y, x) = static_cast<float>(s / 8.0);
      }
    }
  }
  return out;
}

double parse_double(const std::string& cell, std::size_t row, const std::filesystem::path& path) {
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw IoError("bad number '" + cell + "' on row " + std::to_string(row) + " of " + path.string());
  }
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

FeatureStats feature_stats(std::span<const std::vector<double>> features) {
  if (features.size() < 2) throw InvalidArgument("feature_stats needs at least 2 vectors");
  const std::size_t d = features.front().size();
  if (d == 0) throw InvalidArgument("feature_stats: zero-dimensional features");
  for (const auto& f : features) {
    if (f.size() != d) throw InvalidArgument("feature_stats: dimension mismatch");
  }
  FeatureStats s;
  s.n = features.size();
  s.mean.assign(d, 0.0);
  for (const auto& f : features)
    for (std::size_t i = 0; i < d; ++i) s.mean[i] += f[i];
  for (double& m : s.mean) m /= static_cast<double>(s.n);

  std::vector<double> raw(d * d, 0.0);
  for (const auto& f : features) {
    for (std::size_t i = 0; i < d; ++i) {
      const double di = f[i] - s.mean[i];
      for (std::size_t j = 0; j < d; ++j) raw[i * d + j] += di * (f[j] - s.mean[j]);
    }
  }
  s.cov.assign(d * d, 0.0);
  const double denom = static_cast<double>(s.n - 1);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) s.cov[i * d + j] = 0.5 * (raw[i * d + j] + raw[j * d + i]) / denom;
  }
  return s;
}

double frechet_distance(const FeatureStats& a, const FeatureStats& b) {
  if (a.dim() != b.dim() || a.dim() == 0) throw InvalidArgument("frechet_distance: dimension mismatch");
  if (a.cov.size() != a.dim() * a.dim() || b.cov.size() != b.dim() * b.dim()) {
    throw InvalidArgument("frechet_distance: malformed covariance");
  }
  double mean_term = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double diff = a.mean[i] - b.mean[i];
    mean_term += diff * diff;
  }
  const Matrix sa = to_matrix(a);
  const Matrix sb = to_matrix(b);
  const Matrix root_a = psd_sqrt(sa, "covariance A");
  Matrix m = root_a * sb * root_a;
  m = 0.5 * (m + m.transpose());
  const auto es = eigensolve(m, "covariance product");
  const Eigen::VectorXd ev = es.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  double trace_sqrt = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    trace_sqrt += std::sqrt(clamp_eigenvalue(ev(i), scale, "covariance product"));
  }
  const double value = mean_term + sa.trace() + sb.trace() - 2.0 * trace_sqrt;
  return std::max(0.0, value);
}

void MsSsimConfig::validate() const {
  if (window_size == 0 || window_size % 2 == 0) throw InvalidArgument("ms-ssim window size must be odd");
  if (!(window_sigma > 0.0)) throw InvalidArgument("ms-ssim window sigma must be positive");
  if (scale_weights.empty()) throw InvalidArgument("ms-ssim needs at least one scale weight");
  for (double w : scale_weights) {
    if (!(w > 0.0)) throw InvalidArgument("ms-ssim scale weights must be positive");
  }
  if (!(data_range > 0.0)) throw InvalidArgument("ms-ssim data range must be positive");
}

std::size_t MsSsimConfig::usable_scales(const Dims3& dims) const {
  std::size_t scales = 0;
  double extent = static_cast<double>(dims.min_extent());
  while (scales < scale_weights.size() && extent >= static_cast<double>(window_size)) {
    ++scales;
    extent /= 2.0;
  }
  return scales;
}

SsimComponents ssim_single_scale(const Volume3& a, const Volume3& b, const MsSsimConfig& cfg) {
  cfg.validate();
  if (a.dims() != b.dims()) throw InvalidArgument("ssim: volumes differ in dims");
  if (a.empty() || a.dims().min_extent() < cfg.window_size) {
    throw InvalidArgument("ssim: volume " + a.dims().str() + " smaller than the " +
                          std::to_string(cfg.window_size) + "-voxel window");
  }
  const auto g = gaussian_window(cfg);
  const std::size_t n = a.size();
  std::vector<double> va(n), vb(n), aa(n), bb(n), ab(n);
  for (std::size_t i = 0; i < n; ++i) {
    va[i] = a.data()[i];
    vb[i] = b.data()[i];
    aa[i] = va[i] * va[i];
    bb[i] = vb[i] * vb[i];
    ab[i] = va[i] * vb[i];
  }
  const auto mu_a = filter_valid(va, a.dims(), g);
  const auto mu_b = filter_valid(vb, a.dims(), g);
  const auto e_aa = filter_valid(aa, a.dims(), g);
  const auto e_bb = filter_valid(bb, a.dims(), g);
  const auto e_ab = filter_valid(ab, a.dims(), g);

  const double c1 = (cfg.k1 * cfg.data_range) * (cfg.k1 * cfg.data_range);
  const double c2 = (cfg.k2 * cfg.data_range) * (cfg.k2 * cfg.data_range);
  std::vector<double> lum(mu_a.size()), cs(mu_a.size());
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double var_a = e_aa[i] - ma * ma;
    const double var_b = e_bb[i] - mb * mb;
    const double cov = e_ab[i] - ma * mb;
    lum[i] = (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
    cs[i] = (2.0 * cov + c2) / (var_a + var_b + c2);
  }
  const double count = static_cast<double>(mu_a.size());
  return {pairwise_sum(lum) / count, pairwise_sum(cs) / count};
}

double ms_ssim(const Volume3& a, const Volume3& b, const MsSsimConfig& cfg) {
  cfg.validate();
  if (a.dims() != b.dims()) throw InvalidArgument("ms_ssim: volumes differ in dims");
  const std::size_t scales = cfg.usable_scales(a.dims());
  if (scales == 0) {
    throw InvalidArgument("ms_ssim: volume " + a.dims().str() + " too small for even one scale");
  }
  double weight_sum = 0.0;
  for (std::size_t s = 0; s < scales; ++s) weight_sum += cfg.scale_weights[s];

  Volume3 xa = a, xb = b;
  double result = 1.0;
  for (std::size_t s = 0; s < scales; ++s) {
    const double w = cfg.scale_weights[s] / weight_sum;
    const SsimComponents c = ssim_single_scale(xa, xb, cfg);
    result *= std::pow(std::max(0.0, c.contrast_structure), w);
    if (s + 1 == scales) {
      result *= std::pow(std::max(0.0, c.luminance), w);
    } else {
      xa = downsample_for_scale(xa);
      xb = downsample_for_scale(xb);
    }
  }
  return result;
}

double pairwise_sum(std::span<const double> values) noexcept {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double diversity_ms_ssim(std::span<const Volume3> samples, RngState& rng, const MsSsimConfig& cfg,
                         unsigned threads) {
  if (samples.size() < 2) throw InvalidArgument("diversity needs at least 2 samples");
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[rng.uniform_index(i + 1)]);
  }
  const std::size_t pairs = samples.size() / 2;
  std::vector<double> scores(pairs);
  parallel_for(pairs, threads, [&](std::size_t p) {
    scores[p] = ms_ssim(samples[order[2 * p]], samples[order[2 * p + 1]], cfg);
  });
  return pairwise_sum(scores) / static_cast<double>(pairs);
}

std::vector<double> toy_features(const Volume3& volume) {
  if (volume.empty()) throw InvalidArgument("toy_features: empty volume");
  const Dims3& d = volume.dims();
  const double n = static_cast<double>(volume.size());
  double mean = 0.0;
  for (float v : volume.data()) mean += v;
  mean /= n;
  double var = 0.0;
  for (float v : volume.data()) var += (v - mean) * (v - mean);
  var /= n;
  double gd = 0.0, gh = 0.0, gw = 0.0;
  std::size_t nd = 0, nh = 0, nw = 0;
  for (std::size_t z = 0; z < d.d; ++z) {
    for (std::size_t y = 0; y < d.h; ++y) {
      for (std::size_t x = 0; x < d.w; ++x) {
        const double c = volume.at(z, y, x);
        if (z + 1 < d.d) { const double t = volume.at(z + 1, y, x) - c; gd += t * t; ++nd; }
        if (y + 1 < d.h) { const double t = volume.at(z, y + 1, x) - c; gh += t * t; ++nh; }
        if (x + 1 < d.w) { const double t = volume.at(z, y, x + 1) - c; gw += t * t; ++nw; }
      }
    }
  }
  auto avg = [](double s, std::size_t k) { return k ? s / static_cast<double>(k) : 0.0; };
  return {mean, var, avg(gd, nd), avg(gh, nh), avg(gw, nw)};
}

std::vector<std::vector<double>> read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("missing file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("feature file " + path.string() + " has no header row");
  const std::size_t dim = split_csv(line).size();
  std::vector<std::vector<double>> rows;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() != dim) {
      throw IoError("dimension mismatch on row " + std::to_string(row) + " of " + path.string() +
                    ": header has " + std::to_string(dim) + " columns, row has " +
                    std::to_string(cells.size()));
    }
    std::vector<double> v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = parse_double(cells[i], row, path);
    rows.push_back(std::move(v));
  }
  return rows;
}

void write_feature_csv(const std::filesystem::path& path, std::span<const std::vector<double>> features) {
  if (features.empty()) throw InvalidArgument("write_feature_csv: no features");
  const std::size_t dim = features.front().size();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  for (std::size_t i = 0; i < dim; ++i) out << (i ? "," : "") << 'f' << i;
  out << '\n';
  out.precision(17);
  for (const auto& f : features) {
    if (f.size() != dim) throw InvalidArgument("write_feature_csv: dimension mismatch");
    for (std::size_t i = 0; i < dim; ++i) out << (i ? "," : "") << f[i];
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace wdm
