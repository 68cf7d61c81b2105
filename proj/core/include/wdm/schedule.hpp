#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wdm {

/// Parameters that fully determine a linear variance schedule.
struct ScheduleSpec {
  int timesteps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;

  friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
};

/// Precomputed DDPM tables for t = 1..T, held in 64-bit.
///
/// Accessors take the 1-based timestep; alpha_bar_prev(1) is 1 by the
/// convention alpha_bar_0 := 1, which makes posterior_variance(1) == 0 and
/// the final reverse step deterministic.
class NoiseSchedule {
 public:
  static NoiseSchedule linear(int timesteps, double beta_start, double beta_end);
  static NoiseSchedule from_spec(const ScheduleSpec& spec) {
    return linear(spec.timesteps, spec.beta_start, spec.beta_end);
  }

  int timesteps() const noexcept { return static_cast<int>(betas_.size()); }
  const ScheduleSpec& spec() const noexcept { return spec_; }

  double beta(int t) const { return betas_[idx(t)]; }
  double alpha(int t) const { return alphas_[idx(t)]; }
  double alpha_bar(int t) const { return alpha_bars_[idx(t)]; }
  double alpha_bar_prev(int t) const;
  /// 1 - alpha_bar(t), accumulated without cancellation.
  double one_minus_alpha_bar(int t) const { return one_minus_alpha_bars_[idx(t)]; }
  double sqrt_alpha_bar(int t) const { return sqrt_alpha_bars_[idx(t)]; }
  double sqrt_one_minus_alpha_bar(int t) const { return sqrt_one_minus_alpha_bars_[idx(t)]; }
  double posterior_variance(int t) const { return posterior_variances_[idx(t)]; }
  /// Weight on the predicted x0 in the posterior mean.
  double posterior_coef_x0(int t) const { return coef_x0_[idx(t)]; }
  /// Weight on x_t in the posterior mean.
  double posterior_coef_xt(int t) const { return coef_xt_[idx(t)]; }

  std::span<const double> betas() const noexcept { return betas_; }
  std::span<const double> alpha_bars() const noexcept { return alpha_bars_; }
  std::span<const double> posterior_variances() const noexcept { return posterior_variances_; }

  /// Fingerprint of the beta table (hex FNV-1a over the raw doubles).
  std::string hash() const;

  /// Throws InvalidArgument unless 1 <= t <= T.
  void check_timestep(int t) const;

 private:
  NoiseSchedule() = default;
  std::size_t idx(int t) const {
    check_timestep(t);
    return static_cast<std::size_t>(t - 1);
  }

  ScheduleSpec spec_;
  std::vector<double> betas_;
  std::vector<double> alphas_;
  std::vector<double> alpha_bars_;
  std::vector<double> one_minus_alpha_bars_;
  std::vector<double> sqrt_alpha_bars_;
  std::vector<double> sqrt_one_minus_alpha_bars_;
  std::vector<double> posterior_variances_;
  std::vector<double> coef_x0_;
  std::vector<double> coef_xt_;
};

/// beta_t = beta_start + (t-1)/(T-1) * (beta_end - beta_start).
NoiseSchedule linear_schedule(int timesteps, double beta_start, double beta_end);

/// "linear-<T>" with beta range [1e-4, 0.02]; "linear-1000" is the full-scale schedule.
ScheduleSpec schedule_preset(std::string_view name);

}  // namespace wdm
