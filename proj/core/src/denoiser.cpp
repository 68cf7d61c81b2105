#include "wdm/denoiser.hpp"

#include <cmath>

#include "wdm/error.hpp"

namespace wdm {

double analytic_posterior_mean(double x_t, double alpha_bar, double mu0, double var0) noexcept {
  const double noise = 1.0 - alpha_bar;
  return (std::sqrt(alpha_bar) * var0 * x_t + noise * mu0) / (alpha_bar * var0 + noise);
}

AnalyticGaussianDenoiser::AnalyticGaussianDenoiser(double mu0, double var0, NoiseSchedule schedule)
    : mu0_(mu0), var0_(var0), schedule_(std::move(schedule)) {
  if (!std::isfinite(mu0) || !(var0 > 0.0) || !std::isfinite(var0)) {
    throw InvalidArgument("analytic denoiser needs finite mu0 and var0 > 0");
  }
}

CoefficientTensor AnalyticGaussianDenoiser::predict(const CoefficientTensor& x_t, int t) const {
  const double ab = schedule_.alpha_bar(t);
  CoefficientTensor out(x_t.half_dims());
  const auto src = x_t.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = static_cast<float>(analytic_posterior_mean(src[i], ab, mu0_, var0_));
  }
  return out;
}

CoefficientTensor analytic_predict(const CoefficientTensor& x_t, int t, const AnalyticGaussianDenoiser& d) {
  return d.predict(x_t, t);
}

namespace {

class ParameterFreePass final : public ForwardPass {
 public:
  explicit ParameterFreePass(CoefficientTensor prediction) : prediction_(std::move(prediction)) {}
  const CoefficientTensor& prediction() const override { return prediction_; }
  void backward(const CoefficientTensor&, std::span<float>) const override {}

 private:
  CoefficientTensor prediction_;
};

class ConvPass final : public ForwardPass {
 public:
  ConvPass(const TinyConvNet<float>& net, const CoefficientTensor& x_t, int t) : net_(net) {
    prediction_ = CoefficientTensor(net.forward(x_t.map(), t, &tape_));
  }
  const CoefficientTensor& prediction() const override { return prediction_; }
  void backward(const CoefficientTensor& grad_prediction, std::span<float> param_grads) const override {
    if (param_grads.size() != net_.parameter_count()) {
      throw InvalidArgument("gradient buffer does not match parameter count");
    }
    const auto g = net_.backward(tape_, grad_prediction.map());
    for (std::size_t i = 0; i < param_grads.size(); ++i) param_grads[i] += g.params[i];
  }

 private:
  const TinyConvNet<float>& net_;
  TinyConvNet<float>::Tape tape_;
  CoefficientTensor prediction_;
};

}  // namespace

std::unique_ptr<ForwardPass> IdentityDenoiser::forward_pass(const CoefficientTensor& x_t, int t) const {
  return std::make_unique<ParameterFreePass>(predict(x_t, t));
}

std::unique_ptr<ForwardPass> ZeroDenoiser::forward_pass(const CoefficientTensor& x_t, int t) const {
  return std::make_unique<ParameterFreePass>(predict(x_t, t));
}

CoefficientTensor FixedDenoiser::predict(const CoefficientTensor& x_t, int) const {
  if (!x_t.same_shape(x0_)) throw InvalidArgument("fixed denoiser: shape mismatch");
  return x0_;
}

CoefficientTensor TinyConvDenoiser::predict(const CoefficientTensor& x_t, int t) const {
  return CoefficientTensor(net_.forward(x_t.map(), t));
}

std::string TinyConvDenoiser::name() const {
  return net_.config().wavelet_variant ? "tiny-conv-wavelet" : "tiny-conv";
}

std::unique_ptr<ForwardPass> TinyConvDenoiser::forward_pass(const CoefficientTensor& x_t, int t) const {
  return std::make_unique<ConvPass>(net_, x_t, t);
}

}  // namespace wdm
