#include "wdm/diffusion.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "wdm/error.hpp"

namespace wdm {

namespace {

void require_same_shape(const CoefficientTensor& a, const CoefficientTensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw InvalidArgument(std::string(op) + ": shape mismatch (" + a.half_dims().str() + " vs " +
                          b.half_dims().str() + ")");
  }
}

// out = ca * a + cb * b, evaluated per element in 64-bit.
CoefficientTensor combine(double ca, const CoefficientTensor& a, double cb, const CoefficientTensor& b) {
  CoefficientTensor out(a.half_dims());
  const auto sa = a.data();
  const auto sb = b.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = static_cast<float>(ca * static_cast<double>(sa[i]) + cb * static_cast<double>(sb[i]));
  }
  return out;
}

}  // namespace

CoefficientTensor q_sample(const CoefficientTensor& x0, int t, const CoefficientTensor& eps,
                           const NoiseSchedule& schedule) {
  schedule.check_timestep(t);
  require_same_shape(x0, eps, "q_sample");
  return combine(schedule.sqrt_alpha_bar(t), x0, schedule.sqrt_one_minus_alpha_bar(t), eps);
}

CoefficientTensor posterior_mean(const CoefficientTensor& x_t, const CoefficientTensor& x0_hat, int t,
                                 const NoiseSchedule& schedule) {
  schedule.check_timestep(t);
  require_same_shape(x_t, x0_hat, "posterior_mean");
  return combine(schedule.posterior_coef_x0(t), x0_hat, schedule.posterior_coef_xt(t), x_t);
}

double posterior_mean(double x_t, double x0_hat, int t, const NoiseSchedule& schedule) {
  return schedule.posterior_coef_x0(t) * x0_hat + schedule.posterior_coef_xt(t) * x_t;
}

double posterior_variance(int t, const NoiseSchedule& schedule) {
  return schedule.posterior_variance(t);
}

CoefficientTensor p_sample_step(const CoefficientTensor& x_t, const CoefficientTensor& x0_hat, int t,
                                const NoiseSchedule& schedule, RngState& rng) {
  CoefficientTensor mean = posterior_mean(x_t, x0_hat, t, schedule);
  const double var = schedule.posterior_variance(t);
  if (t == 1 || var == 0.0) return mean;
  const double sigma = std::sqrt(var);
  std::vector<double> z(mean.size());
  rng.fill_normal(std::span<double>(z));
  auto dst = mean.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = static_cast<float>(static_cast<double>(dst[i]) + sigma * z[i]);
  }
  return mean;
}

TrainStepResult train_step(std::span<const CoefficientTensor> batch, TrainableDenoiser& denoiser,
                           const NoiseSchedule& schedule, RngState& rng, AdamState& optimizer) {
  if (batch.empty()) throw InvalidArgument("train_step: empty batch");
  const auto params = denoiser.parameters();
  if (optimizer.m.size() != params.size()) {
    throw InvalidArgument("train_step: optimizer state does not match parameter count");
  }
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  std::vector<float> grads(params.size(), 0.0f);
  double loss_sum = 0.0;
  double t_sum = 0.0;

  for (const CoefficientTensor& x0 : batch) {
    const int t = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(schedule.timesteps())));
    CoefficientTensor eps(x0.half_dims());
    rng.fill_normal(eps.data());
    const CoefficientTensor x_t = q_sample(x0, t, eps, schedule);

    const auto pass = denoiser.forward_pass(x_t, t);
    const auto pred = pass->prediction().data();
    const auto target = x0.data();
    CoefficientTensor grad(x0.half_dims());
    auto g = grad.data();
    double sq = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double diff = static_cast<double>(pred[i]) - static_cast<double>(target[i]);
      sq += diff * diff;
      g[i] = static_cast<float>(2.0 * diff * inv_batch);
    }
    loss_sum += sq;
    t_sum += t;
    pass->backward(grad, grads);
  }

  const double loss = loss_sum * inv_batch;
  if (!std::isfinite(loss)) {
    throw NumericError("train_step: non-finite loss (training diverged)");
  }
  adam_step(params, grads, optimizer);
  return {loss, t_sum * inv_batch};
}

CoefficientTensor sample_coefficients(const Denoiser& denoiser, Dims3 half_dims,
                                      const NoiseSchedule& schedule, RngState& rng) {
  if (half_dims.empty()) throw InvalidArgument("sample: empty tensor shape");
  CoefficientTensor x(half_dims);
  rng.fill_normal(x.data());
  for (int t = schedule.timesteps(); t >= 1; --t) {
    const CoefficientTensor x0_hat = denoiser.predict(x, t);
    if (!x0_hat.same_shape(x)) throw InvalidArgument("sample: denoiser changed the tensor shape");
    if (!x0_hat.all_finite()) {
      throw NumericError("sample: non-finite denoiser output at t=" + std::to_string(t));
    }
    x = p_sample_step(x, x0_hat, t, schedule, rng);
    if (!x.all_finite()) throw NumericError("sample: non-finite state at t=" + std::to_string(t));
  }
  return x;
}

Volume3 sample(const Denoiser& denoiser, Dims3 half_dims, const NoiseSchedule& schedule, RngState& rng) {
  return idwt3(sample_coefficients(denoiser, half_dims, schedule, rng));
}

}  // namespace wdm
