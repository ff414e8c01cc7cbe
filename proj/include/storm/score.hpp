#pragma once

#include <memory>
#include <vector>

#include "storm/nn.hpp"
#include "storm/sde.hpp"

namespace storm {

/// Score-function abstraction s(x, conditioning, tau). `sigma` is the
/// current noise level sigma(tau), passed explicitly so implementations can
/// scale their raw output. Conditioning spectrograms are stacked as extra
/// input channels by network-based models and ignored by analytic ones.
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;
  virtual std::vector<cplx> evaluate(const std::vector<cplx>& x, int bins, int frames,
                                     const std::vector<const std::vector<cplx>*>& conditioning,
                                     double tau, double sigma) const = 0;
};

/// Denoised-estimate abstraction D(y).
class PredictorModel {
 public:
  virtual ~PredictorModel() = default;
  virtual std::vector<cplx> evaluate(const std::vector<cplx>& y, int bins, int frames) const = 0;
};

class IdentityPredictor final : public PredictorModel {
 public:
  std::vector<cplx> evaluate(const std::vector<cplx>& y, int, int) const override { return y; }
};

/// Exact score of the diffused marginal when the clean distribution is a
/// single complex Gaussian N_C(m0, s0^2) and the conditioning value is a
/// known constant: p_tau = N_C(exp(-g*tau)*m0 + (1-exp(-g*tau))*y,
/// exp(-2*g*tau)*s0^2 + sigma(tau)^2). Verification oracle for the sampler.
class AnalyticGaussianScore final : public ScoreModel {
 public:
  AnalyticGaussianScore(cplx m0, double s0, const OuveParams& p, cplx y)
      : m0_(m0), s0_(s0), params_(p), y_(y) {
    if (s0 < 0.0) throw std::invalid_argument("analytic score: s0 must be >= 0");
  }

  cplx marginal_mean(double tau) const;
  double marginal_var(double tau) const;

  /// score(x, tau) = -(x - marginal_mean(tau)) / marginal_var(tau).
  cplx evaluate_scalar(cplx x, double tau) const;

  std::vector<cplx> evaluate(const std::vector<cplx>& x, int bins, int frames,
                             const std::vector<const std::vector<cplx>*>& conditioning,
                             double tau, double sigma) const override;

 private:
  cplx m0_;
  double s0_;
  OuveParams params_;
  cplx y_;
};

/// Counting decorator used to audit network-call budgets.
class CountingScore final : public ScoreModel {
 public:
  explicit CountingScore(const ScoreModel& inner) : inner_(inner) {}
  std::vector<cplx> evaluate(const std::vector<cplx>& x, int bins, int frames,
                             const std::vector<const std::vector<cplx>*>& conditioning,
                             double tau, double sigma) const override {
    ++calls_;
    return inner_.evaluate(x, bins, frames, conditioning, tau, sigma);
  }
  int calls() const { return calls_; }

 private:
  const ScoreModel& inner_;
  mutable int calls_ = 0;
};

/// Complex spectrogram data <-> stacked real/imaginary channel tensors.
Tensor stack_complex_channels(const std::vector<const std::vector<cplx>*>& inputs, int bins,
                              int frames);
std::vector<cplx> tensor_to_complex(const Tensor& t, int first_channel = 0);

/// Small trainable score network: a convolutional stack over the stacked
/// real/imaginary channels of (x, conditioning...), FiLM-modulated by a
/// sinusoidal embedding of log sigma(tau). The raw output is divided by
/// sigma so the parameterization stays well-scaled across noise levels.
class TinyScoreNet final : public ScoreModel {
 public:
  /// n_conditioners: spectrograms stacked next to x (1 = [y], 2 = [y, D(y)]).
  TinyScoreNet(int n_conditioners, int hidden = 12, int layers = 4, int kernel = 5,
               int emb_dim = 16);
  explicit TinyScoreNet(const ConvStackConfig& cfg);

  const ConvStack& stack() const { return stack_; }
  std::size_t param_count() const { return stack_.param_count(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  void set_params(std::vector<double> p);
  void init(Rng& rng) { params_ = stack_.init_params(rng); }

  std::vector<cplx> evaluate(const std::vector<cplx>& x, int bins, int frames,
                             const std::vector<const std::vector<cplx>*>& conditioning,
                             double tau, double sigma) const override;

  /// Training-path forward; keeps the cache needed for backward.
  std::vector<cplx> forward_cached(const std::vector<cplx>& x, int bins, int frames,
                                   const std::vector<const std::vector<cplx>*>& conditioning,
                                   double sigma, StackCache& cache) const;

  /// Backprop through the cached forward. grad_score is d(loss)/d(score
  /// output), complex layout. Parameter gradients accumulate into
  /// grad_params; when grad_inputs is non-null it receives the gradient
  /// with respect to the full stacked input tensor (x and conditioners).
  void backward(const StackCache& cache, const std::vector<cplx>& grad_score, int bins,
                int frames, double sigma, std::vector<double>& grad_params,
                Tensor* grad_inputs = nullptr) const;

 private:
  ConvStack stack_;
  std::vector<double> params_;
};

/// Trainable predictor D(y) = y + stack(y) (residual correction).
class PredictorNet final : public PredictorModel {
 public:
  explicit PredictorNet(int hidden = 12, int layers = 4, int kernel = 5);
  explicit PredictorNet(const ConvStackConfig& cfg);

  const ConvStack& stack() const { return stack_; }
  std::size_t param_count() const { return stack_.param_count(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  void set_params(std::vector<double> p);
  void init(Rng& rng) { params_ = stack_.init_params(rng); }

  std::vector<cplx> evaluate(const std::vector<cplx>& y, int bins, int frames) const override;

  std::vector<cplx> forward_cached(const std::vector<cplx>& y, int bins, int frames,
                                   StackCache& cache) const;

  void backward(const StackCache& cache, const std::vector<cplx>& grad_out, int bins, int frames,
                std::vector<double>& grad_params) const;

 private:
  ConvStack stack_;
  std::vector<double> params_;
};

}  // namespace storm
