#pragma once

#include <span>

#include "wdm/denoiser.hpp"
#include "wdm/optimizer.hpp"
#include "wdm/rng.hpp"
#include "wdm/schedule.hpp"
#include "wdm/wavelet.hpp"

namespace wdm {

/// x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps.
CoefficientTensor q_sample(const CoefficientTensor& x0, int t, const CoefficientTensor& eps,
                           const NoiseSchedule& schedule);

/// Mean of p(x_{t-1} | x_t, x0_hat):
///   sqrt(abar_{t-1}) beta_t / (1 - abar_t) * x0_hat
/// + sqrt(alpha_t) (1 - abar_{t-1}) / (1 - abar_t) * x_t.
CoefficientTensor posterior_mean(const CoefficientTensor& x_t, const CoefficientTensor& x0_hat, int t,
                                 const NoiseSchedule& schedule);

/// Scalar form of posterior_mean, in 64-bit.
double posterior_mean(double x_t, double x0_hat, int t, const NoiseSchedule& schedule);

/// (1 - abar_{t-1}) / (1 - abar_t) * beta_t; zero at t = 1.
double posterior_variance(int t, const NoiseSchedule& schedule);

/// Draws x_{t-1} = mean + sqrt(var) z. At t = 1 the variance is zero, the
/// mean is returned as is and `rng` is not advanced.
CoefficientTensor p_sample_step(const CoefficientTensor& x_t, const CoefficientTensor& x0_hat, int t,
                                const NoiseSchedule& schedule, RngState& rng);

struct TrainStepResult {
  double loss = 0.0;    // batch mean of ||x0_hat - x0||^2, before the update
  double t_mean = 0.0;  // mean sampled timestep
};

/// One iteration of wavelet-domain x0-prediction training. Each batch
/// element draws its own t ~ U{1..T} and eps from `rng` in batch order;
/// gradients are summed in batch order and one Adam update is applied.
/// Throws NumericError on a non-finite loss before touching the parameters.
TrainStepResult train_step(std::span<const CoefficientTensor> batch, TrainableDenoiser& denoiser,
                           const NoiseSchedule& schedule, RngState& rng, AdamState& optimizer);

/// Ancestral sampling in coefficient space, from x_T ~ N(0, I) down to x_0.
/// No clamping is applied. Throws NumericError naming t if a non-finite
/// value appears.
CoefficientTensor sample_coefficients(const Denoiser& denoiser, Dims3 half_dims,
                                      const NoiseSchedule& schedule, RngState& rng);

/// sample_coefficients followed by idwt3.
Volume3 sample(const Denoiser& denoiser, Dims3 half_dims, const NoiseSchedule& schedule, RngState& rng);

}  // namespace wdm
