#include "storm/score.hpp"

#include <cmath>

namespace storm {

cplx AnalyticGaussianScore::marginal_mean(double tau) const {
  const double w0 = std::exp(-params_.gamma * tau);
  return w0 * m0_ + (1.0 - w0) * y_;
}

double AnalyticGaussianScore::marginal_var(double tau) const {
  const double w0 = std::exp(-2.0 * params_.gamma * tau);
  const double s = kernel_std(tau, params_);
  return w0 * s0_ * s0_ + s * s;
}

cplx AnalyticGaussianScore::evaluate_scalar(cplx x, double tau) const {
  const double var = marginal_var(tau);
  if (var <= 0.0) throw NumericError("analytic score: zero marginal variance");
  return -(x - marginal_mean(tau)) / var;
}

std::vector<cplx> AnalyticGaussianScore::evaluate(
    const std::vector<cplx>& x, int, int, const std::vector<const std::vector<cplx>*>&,
    double tau, double) const {
  const double var = marginal_var(tau);
  if (var <= 0.0) throw NumericError("analytic score: zero marginal variance");
  const cplx mean = marginal_mean(tau);
  std::vector<cplx> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = -(x[i] - mean) / var;
  return out;
}

Tensor stack_complex_channels(const std::vector<const std::vector<cplx>*>& inputs, int bins,
                              int frames) {
  Tensor t(2 * static_cast<int>(inputs.size()), bins, frames);
  const std::size_t plane = static_cast<std::size_t>(bins) * frames;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const std::vector<cplx>& src = *inputs[k];
    if (src.size() != plane)
      throw std::invalid_argument("stack channels: input size mismatch");
    double* re = &t.v[(2 * k) * plane];
    double* im = &t.v[(2 * k + 1) * plane];
    for (std::size_t i = 0; i < plane; ++i) {
      re[i] = src[i].real();
      im[i] = src[i].imag();
    }
  }
  return t;
}

std::vector<cplx> tensor_to_complex(const Tensor& t, int first_channel) {
  const std::size_t plane = static_cast<std::size_t>(t.rows) * t.cols;
  const double* re = &t.v[static_cast<std::size_t>(first_channel) * plane];
  const double* im = &t.v[static_cast<std::size_t>(first_channel + 1) * plane];
  std::vector<cplx> out(plane);
  for (std::size_t i = 0; i < plane; ++i) out[i] = {re[i], im[i]};
  return out;
}

namespace {

ConvStackConfig score_config(int n_conditioners, int hidden, int layers, int kernel,
                             int emb_dim) {
  ConvStackConfig cfg;
  cfg.in_channels = 2 * (1 + n_conditioners);
  cfg.hidden_channels = hidden;
  cfg.out_channels = 2;
  cfg.layers = layers;
  cfg.kernel = kernel;
  cfg.use_film = true;
  cfg.emb_dim = emb_dim;
  return cfg;
}

ConvStackConfig predictor_config(int hidden, int layers, int kernel) {
  ConvStackConfig cfg;
  cfg.in_channels = 2;
  cfg.hidden_channels = hidden;
  cfg.out_channels = 2;
  cfg.layers = layers;
  cfg.kernel = kernel;
  cfg.use_film = false;
  return cfg;
}

constexpr double kSigmaFloor = 1e-8;

}  // namespace

TinyScoreNet::TinyScoreNet(int n_conditioners, int hidden, int layers, int kernel, int emb_dim)
    : stack_(score_config(n_conditioners, hidden, layers, kernel, emb_dim)),
      params_(stack_.param_count(), 0.0) {}

TinyScoreNet::TinyScoreNet(const ConvStackConfig& cfg)
    : stack_(cfg), params_(stack_.param_count(), 0.0) {
  if (!cfg.use_film || cfg.out_channels != 2)
    throw std::invalid_argument("score net: config must use FiLM and 2 output channels");
}

void TinyScoreNet::set_params(std::vector<double> p) {
  if (p.size() != stack_.param_count())
    throw std::invalid_argument("score net: parameter count mismatch");
  params_ = std::move(p);
}

std::vector<cplx> TinyScoreNet::evaluate(
    const std::vector<cplx>& x, int bins, int frames,
    const std::vector<const std::vector<cplx>*>& conditioning, double, double sigma) const {
  StackCache cache;
  return forward_cached(x, bins, frames, conditioning, sigma, cache);
}

std::vector<cplx> TinyScoreNet::forward_cached(
    const std::vector<cplx>& x, int bins, int frames,
    const std::vector<const std::vector<cplx>*>& conditioning, double sigma,
    StackCache& cache) const {
  std::vector<const std::vector<cplx>*> stacked;
  stacked.reserve(1 + conditioning.size());
  stacked.push_back(&x);
  for (const auto* c : conditioning) stacked.push_back(c);

  const Tensor input = stack_complex_channels(stacked, bins, frames);
  const std::vector<double> emb = noise_embedding(sigma, stack_.config().emb_dim);
  const Tensor raw = stack_.forward(params_, input, emb, &cache);

  std::vector<cplx> out = tensor_to_complex(raw);
  const double inv_sigma = 1.0 / std::max(sigma, kSigmaFloor);
  for (cplx& c : out) c *= inv_sigma;
  return out;
}

void TinyScoreNet::backward(const StackCache& cache, const std::vector<cplx>& grad_score,
                            int bins, int frames, double sigma,
                            std::vector<double>& grad_params, Tensor* grad_inputs) const {
  const double inv_sigma = 1.0 / std::max(sigma, kSigmaFloor);
  Tensor g(2, bins, frames);
  const std::size_t plane = static_cast<std::size_t>(bins) * frames;
  for (std::size_t i = 0; i < plane; ++i) {
    g.v[i] = grad_score[i].real() * inv_sigma;
    g.v[plane + i] = grad_score[i].imag() * inv_sigma;
  }
  stack_.backward(params_, cache, g, grad_params, grad_inputs);
}

PredictorNet::PredictorNet(int hidden, int layers, int kernel)
    : stack_(predictor_config(hidden, layers, kernel)), params_(stack_.param_count(), 0.0) {}

PredictorNet::PredictorNet(const ConvStackConfig& cfg)
    : stack_(cfg), params_(stack_.param_count(), 0.0) {
  if (cfg.use_film || cfg.in_channels != 2 || cfg.out_channels != 2)
    throw std::invalid_argument("predictor net: config must be 2->2 channels without FiLM");
}

void PredictorNet::set_params(std::vector<double> p) {
  if (p.size() != stack_.param_count())
    throw std::invalid_argument("predictor net: parameter count mismatch");
  params_ = std::move(p);
}

std::vector<cplx> PredictorNet::evaluate(const std::vector<cplx>& y, int bins,
                                         int frames) const {
  StackCache cache;
  return forward_cached(y, bins, frames, cache);
}

std::vector<cplx> PredictorNet::forward_cached(const std::vector<cplx>& y, int bins, int frames,
                                               StackCache& cache) const {
  const Tensor input = stack_complex_channels({&y}, bins, frames);
  const Tensor raw = stack_.forward(params_, input, {}, &cache);
  std::vector<cplx> out = tensor_to_complex(raw);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += y[i];  // residual
  return out;
}

void PredictorNet::backward(const StackCache& cache, const std::vector<cplx>& grad_out,
                            int bins, int frames, std::vector<double>& grad_params) const {
  Tensor g(2, bins, frames);
  const std::size_t plane = static_cast<std::size_t>(bins) * frames;
  for (std::size_t i = 0; i < plane; ++i) {
    g.v[i] = grad_out[i].real();
    g.v[plane + i] = grad_out[i].imag();
  }
  stack_.backward(params_, cache, g, grad_params, nullptr);
}

}  // namespace storm
