#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "storm/common.hpp"

namespace storm {

/// Dense CHW tensor of doubles (rows = frequency bins, cols = frames).
struct Tensor {
  int ch = 0, rows = 0, cols = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int c, int r, int w) : ch(c), rows(r), cols(w) {
    v.assign(static_cast<std::size_t>(c) * r * w, 0.0);
  }

  double& at(int c, int r, int w) {
    return v[(static_cast<std::size_t>(c) * rows + r) * cols + w];
  }
  double at(int c, int r, int w) const {
    return v[(static_cast<std::size_t>(c) * rows + r) * cols + w];
  }
  std::size_t size() const { return v.size(); }
  bool same_shape(const Tensor& o) const {
    return ch == o.ch && rows == o.rows && cols == o.cols;
  }
};

/// Configuration of the small convolutional stack shared by the score model
/// and the predictor. `layers` convolutions with same-padding `kernel`,
/// SiLU activations, and optional per-layer FiLM modulation driven by a
/// sinusoidal noise-level embedding.
struct ConvStackConfig {
  int in_channels = 6;
  int hidden_channels = 12;
  int out_channels = 2;
  int layers = 4;
  int kernel = 5;
  bool use_film = false;
  int emb_dim = 16;

  std::string descriptor() const;
  int receptive_field() const { return layers * (kernel - 1) + 1; }
};

ConvStackConfig parse_descriptor(const std::string& descriptor);

/// Sinusoidal embedding of log(sigma), dimension emb_dim (even).
std::vector<double> noise_embedding(double sigma, int emb_dim);

/// Forward cache for backprop: inputs and intermediate activations of one
/// forward pass. Local to each call; the stack itself is stateless apart
/// from its parameters.
struct StackCache {
  std::vector<Tensor> conv_in;    // input to conv l
  std::vector<Tensor> conv_out;   // conv l output (pre-FiLM)
  std::vector<Tensor> film_out;   // FiLM l output (pre-activation)
  std::vector<double> emb;
};

/// Plain convolutional stack with manually implemented backprop. Parameters
/// live in an external flat vector so the optimizer, EMA, and checkpointing
/// can treat every model uniformly.
class ConvStack {
 public:
  explicit ConvStack(const ConvStackConfig& cfg);

  const ConvStackConfig& config() const { return cfg_; }
  std::size_t param_count() const { return param_count_; }

  std::vector<double> init_params(Rng& rng) const;

  Tensor forward(const std::vector<double>& params, const Tensor& input,
                 const std::vector<double>& emb, StackCache* cache = nullptr) const;

  /// Accumulates parameter gradients into grad_params (same layout as
  /// params) and, when grad_input is non-null, writes the gradient with
  /// respect to the stack input.
  void backward(const std::vector<double>& params, const StackCache& cache,
                const Tensor& grad_out, std::vector<double>& grad_params,
                Tensor* grad_input = nullptr) const;

 private:
  struct ConvShape {
    int cin, cout;
    std::size_t w_off, b_off;
  };
  struct FilmShape {
    int ch;
    std::size_t w_scale_off, b_scale_off, w_shift_off, b_shift_off;
  };

  ConvStackConfig cfg_;
  std::vector<ConvShape> convs_;
  std::vector<FilmShape> films_;
  std::size_t param_count_ = 0;

  void conv_forward(const std::vector<double>& params, const ConvShape& shape,
                    const Tensor& in, Tensor& out) const;
  void conv_backward(const std::vector<double>& params, const ConvShape& shape,
                     const Tensor& in, const Tensor& gout, std::vector<double>& gparams,
                     Tensor* gin) const;
};

/// Adam optimizer state (bias-corrected first/second moments).
struct AdamState {
  std::vector<double> m, v;
  long step = 0;

  void init(std::size_t n) {
    m.assign(n, 0.0);
    v.assign(n, 0.0);
    step = 0;
  }
};

struct AdamConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& state,
               const AdamConfig& cfg);

/// ema <- decay * ema + (1 - decay) * current.
void ema_update(std::vector<double>& ema, const std::vector<double>& current, double decay);

}  // namespace storm
