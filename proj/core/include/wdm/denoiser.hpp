#pragma once

#include <memory>
#include <span>
#include <string>

#include "wdm/schedule.hpp"
#include "wdm/tiny_conv_net.hpp"
#include "wdm/wavelet.hpp"

namespace wdm {

/// Time-conditioned x0 predictor: predict(x_t, t) estimates the clean
/// coefficients. Implementations are immutable during predict and may be
/// called concurrently.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual CoefficientTensor predict(const CoefficientTensor& x_t, int t) const = 0;
  virtual std::string name() const = 0;
};

/// A recorded forward evaluation that can be differentiated.
class ForwardPass {
 public:
  virtual ~ForwardPass() = default;
  virtual const CoefficientTensor& prediction() const = 0;
  /// Adds dL/dparams into `param_grads` given dL/dprediction.
  virtual void backward(const CoefficientTensor& grad_prediction, std::span<float> param_grads) const = 0;
};

class TrainableDenoiser : public Denoiser {
 public:
  virtual std::span<float> parameters() = 0;
  virtual std::span<const float> parameters() const = 0;
  virtual std::unique_ptr<ForwardPass> forward_pass(const CoefficientTensor& x_t, int t) const = 0;
};

/// E[x0 | x_t] for x0 ~ N(mu0, var0) observed through
/// x_t = sqrt(alpha_bar) x0 + sqrt(1 - alpha_bar) eps.
double analytic_posterior_mean(double x_t, double alpha_bar, double mu0, double var0) noexcept;

/// Exact posterior-mean denoiser for i.i.d. Gaussian coefficients. Used as
/// the oracle that exercises the sampler without any learned model.
class AnalyticGaussianDenoiser final : public Denoiser {
 public:
  AnalyticGaussianDenoiser(double mu0, double var0, NoiseSchedule schedule);
  CoefficientTensor predict(const CoefficientTensor& x_t, int t) const override;
  std::string name() const override { return "analytic-gaussian"; }

  double mu0() const noexcept { return mu0_; }
  double var0() const noexcept { return var0_; }

 private:
  double mu0_;
  double var0_;
  NoiseSchedule schedule_;
};

/// Elementwise analytic prediction (see AnalyticGaussianDenoiser).
CoefficientTensor analytic_predict(const CoefficientTensor& x_t, int t, const AnalyticGaussianDenoiser& d);

/// Returns x_t unchanged. No parameters.
class IdentityDenoiser final : public TrainableDenoiser {
 public:
  CoefficientTensor predict(const CoefficientTensor& x_t, int) const override { return x_t; }
  std::string name() const override { return "identity"; }
  std::span<float> parameters() override { return {}; }
  std::span<const float> parameters() const override { return {}; }
  std::unique_ptr<ForwardPass> forward_pass(const CoefficientTensor& x_t, int t) const override;
};

/// Always predicts zero. No parameters.
class ZeroDenoiser final : public TrainableDenoiser {
 public:
  CoefficientTensor predict(const CoefficientTensor& x_t, int) const override {
    return CoefficientTensor(x_t.half_dims());
  }
  std::string name() const override { return "zero"; }
  std::span<float> parameters() override { return {}; }
  std::span<const float> parameters() const override { return {}; }
  std::unique_ptr<ForwardPass> forward_pass(const CoefficientTensor& x_t, int t) const override;
};

/// Always predicts a fixed tensor.
class FixedDenoiser final : public Denoiser {
 public:
  explicit FixedDenoiser(CoefficientTensor x0) : x0_(std::move(x0)) {}
  CoefficientTensor predict(const CoefficientTensor& x_t, int t) const override;
  std::string name() const override { return "fixed"; }

 private:
  CoefficientTensor x0_;
};

/// The trainable convolutional denoiser (32-bit).
class TinyConvDenoiser final : public TrainableDenoiser {
 public:
  explicit TinyConvDenoiser(NetConfig config) : net_(config) {}
  explicit TinyConvDenoiser(TinyConvNet<float> net) : net_(std::move(net)) {}

  CoefficientTensor predict(const CoefficientTensor& x_t, int t) const override;
  std::string name() const override;
  std::span<float> parameters() override { return net_.params(); }
  std::span<const float> parameters() const override { return net_.params(); }
  std::unique_ptr<ForwardPass> forward_pass(const CoefficientTensor& x_t, int t) const override;

  TinyConvNet<float>& net() noexcept { return net_; }
  const TinyConvNet<float>& net() const noexcept { return net_; }

 private:
  TinyConvNet<float> net_;
};

}  // namespace wdm
