#include "wdm/schedule.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "wdm/error.hpp"
#include "wdm/hash.hpp"

namespace wdm {

NoiseSchedule NoiseSchedule::linear(int timesteps, double beta_start, double beta_end) {
  if (timesteps < 1) throw InvalidArgument("schedule needs T >= 1");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
    throw InvalidArgument("schedule needs 0 < beta_start <= beta_end < 1");
  }
  const auto n = static_cast<std::size_t>(timesteps);
  NoiseSchedule s;
  s.spec_ = {timesteps, beta_start, beta_end};
  s.betas_.resize(n);
  s.alphas_.resize(n);
  s.alpha_bars_.resize(n);
  s.one_minus_alpha_bars_.resize(n);
  s.sqrt_alpha_bars_.resize(n);
  s.sqrt_one_minus_alpha_bars_.resize(n);
  s.posterior_variances_.resize(n);
  s.coef_x0_.resize(n);
  s.coef_xt_.resize(n);

  double prev_bar = 1.0;
  double prev_one_minus = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double beta =
        n == 1 ? beta_start
               : beta_start + static_cast<double>(i) / static_cast<double>(n - 1) * (beta_end - beta_start);
    const double alpha = 1.0 - beta;
    const double bar = prev_bar * alpha;
    // 1 - a*(1-b) = (1 - a) + a*b; exact at t = 1 where it equals beta_1.
    const double one_minus = prev_one_minus + prev_bar * beta;
    s.betas_[i] = beta;
    s.alphas_[i] = alpha;
    s.alpha_bars_[i] = bar;
    s.one_minus_alpha_bars_[i] = one_minus;
    s.sqrt_alpha_bars_[i] = std::sqrt(bar);
    s.sqrt_one_minus_alpha_bars_[i] = std::sqrt(one_minus);
    s.posterior_variances_[i] = prev_one_minus / one_minus * beta;
    s.coef_x0_[i] = std::sqrt(prev_bar) * beta / one_minus;
    s.coef_xt_[i] = std::sqrt(alpha) * prev_one_minus / one_minus;
    prev_bar = bar;
    prev_one_minus = one_minus;
  }
  return s;
}

double NoiseSchedule::alpha_bar_prev(int t) const {
  const std::size_t i = idx(t);
  return i == 0 ? 1.0 : alpha_bars_[i - 1];
}

void NoiseSchedule::check_timestep(int t) const {
  if (t < 1 || t > timesteps()) {
    throw InvalidArgument("timestep " + std::to_string(t) + " outside [1, " +
                          std::to_string(timesteps()) + "]");
  }
}

std::string NoiseSchedule::hash() const {
  return hex64(fnv1a64(std::as_bytes(std::span<const double>(betas_))));
}

NoiseSchedule linear_schedule(int timesteps, double beta_start, double beta_end) {
  return NoiseSchedule::linear(timesteps, beta_start, beta_end);
}

ScheduleSpec schedule_preset(std::string_view name) {
  constexpr std::string_view prefix = "linear-";
  if (name.substr(0, prefix.size()) == prefix) {
    const auto digits = name.substr(prefix.size());
    int t = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), t);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && t >= 1) {
      return {t, 1e-4, 0.02};
    }
  }
  throw InvalidArgument("unknown schedule preset '" + std::string(name) +
                        "' (expected linear-<T>, e.g. linear-1000)");
}

}  // namespace wdm
