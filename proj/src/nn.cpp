#include "storm/nn.hpp"

#include <cmath>
#include <cstdio>

namespace storm {

namespace {

inline double silu(double x) { return x / (1.0 + std::exp(-x)); }

inline double silu_grad(double x) {
  const double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 + x * (1.0 - s));
}

// Horizontal stencil kernels with a compile-time tap count so the column
// loops vectorize with the taps unrolled. Edges are patched separately.

template <int K>
void row_correlate_add(double* out, const double* in, const double* w, int cols) {
  constexpr int half = K / 2;
  const int lo = std::min(half, cols), hi = std::max(cols - half, lo);
  for (int c = lo; c < hi; ++c) {
    const double* ip = in + c - half;
    double acc = 0.0;
    for (int j = 0; j < K; ++j) acc += w[j] * ip[j];
    out[c] += acc;
  }
  for (int c = 0; c < lo; ++c) {
    double acc = 0.0;
    for (int j = 0; j < K; ++j) {
      const int cc = c + j - half;
      if (cc >= 0 && cc < cols) acc += w[j] * in[cc];
    }
    out[c] += acc;
  }
  for (int c = hi; c < cols; ++c) {
    double acc = 0.0;
    for (int j = 0; j < K; ++j) {
      const int cc = c + j - half;
      if (cc >= 0 && cc < cols) acc += w[j] * in[cc];
    }
    out[c] += acc;
  }
}

// w_acc[j] += sum_c g[c] * in[c + j - K/2]
template <int K>
void row_weight_grads(const double* g, const double* in, double* w_acc, int cols) {
  constexpr int half = K / 2;
  const int lo = std::min(half, cols), hi = std::max(cols - half, lo);
  double acc[K] = {};
  for (int c = lo; c < hi; ++c) {
    const double* ip = in + c - half;
    const double gv = g[c];
    for (int j = 0; j < K; ++j) acc[j] += gv * ip[j];
  }
  for (int c = 0; c < lo; ++c) {
    const double gv = g[c];
    for (int j = 0; j < K; ++j) {
      const int cc = c + j - half;
      if (cc >= 0 && cc < cols) acc[j] += gv * in[cc];
    }
  }
  for (int c = hi; c < cols; ++c) {
    const double gv = g[c];
    for (int j = 0; j < K; ++j) {
      const int cc = c + j - half;
      if (cc >= 0 && cc < cols) acc[j] += gv * in[cc];
    }
  }
  for (int j = 0; j < K; ++j) w_acc[j] += acc[j];
}

// out[c] += sum_j w[K-1-j] * g[c + j - K/2]  (flipped taps)
template <int K>
void row_convolve_add(double* out, const double* g, const double* w, int cols) {
  double flipped[K];
  for (int j = 0; j < K; ++j) flipped[j] = w[K - 1 - j];
  row_correlate_add<K>(out, g, flipped, cols);
}

using RowCorrelate = void (*)(double*, const double*, const double*, int);
using RowWeightGrads = void (*)(const double*, const double*, double*, int);

RowCorrelate pick_correlate(int k) {
  switch (k) {
    case 3: return row_correlate_add<3>;
    case 5: return row_correlate_add<5>;
    case 7: return row_correlate_add<7>;
    default: return nullptr;
  }
}

RowCorrelate pick_convolve(int k) {
  switch (k) {
    case 3: return row_convolve_add<3>;
    case 5: return row_convolve_add<5>;
    case 7: return row_convolve_add<7>;
    default: return nullptr;
  }
}

RowWeightGrads pick_weight_grads(int k) {
  switch (k) {
    case 3: return row_weight_grads<3>;
    case 5: return row_weight_grads<5>;
    case 7: return row_weight_grads<7>;
    default: return nullptr;
  }
}

}  // namespace

std::string ConvStackConfig::descriptor() const {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "convstack:in=%d,hidden=%d,out=%d,layers=%d,k=%d,film=%d,emb=%d",
                in_channels, hidden_channels, out_channels, layers, kernel, use_film ? 1 : 0,
                emb_dim);
  return buf;
}

ConvStackConfig parse_descriptor(const std::string& descriptor) {
  ConvStackConfig cfg;
  int film = 0;
  const int n = std::sscanf(descriptor.c_str(),
                            "convstack:in=%d,hidden=%d,out=%d,layers=%d,k=%d,film=%d,emb=%d",
                            &cfg.in_channels, &cfg.hidden_channels, &cfg.out_channels,
                            &cfg.layers, &cfg.kernel, &film, &cfg.emb_dim);
  if (n != 7) throw DataError("model descriptor is malformed: " + descriptor);
  cfg.use_film = film != 0;
  return cfg;
}

std::vector<double> noise_embedding(double sigma, int emb_dim) {
  std::vector<double> emb(static_cast<std::size_t>(emb_dim));
  const double pos = std::log(std::max(sigma, 1e-12));
  const int half = emb_dim / 2;
  for (int j = 0; j < half; ++j) {
    const double freq = std::exp(-std::log(1e4) * j / std::max(half - 1, 1));
    emb[static_cast<std::size_t>(2 * j)] = std::sin(pos * freq);
    emb[static_cast<std::size_t>(2 * j + 1)] = std::cos(pos * freq);
  }
  return emb;
}

ConvStack::ConvStack(const ConvStackConfig& cfg) : cfg_(cfg) {
  if (cfg.layers < 2) throw std::invalid_argument("conv stack: need at least 2 layers");
  if (cfg.kernel % 2 != 1) throw std::invalid_argument("conv stack: kernel must be odd");
  if (pick_correlate(cfg.kernel) == nullptr)
    throw std::invalid_argument("conv stack: kernel must be 3, 5 or 7");
  if (cfg.use_film && cfg.emb_dim % 2 != 0)
    throw std::invalid_argument("conv stack: emb_dim must be even");

  std::size_t off = 0;
  const int k2 = cfg.kernel * cfg.kernel;
  for (int l = 0; l < cfg.layers; ++l) {
    ConvShape c;
    c.cin = l == 0 ? cfg.in_channels : cfg.hidden_channels;
    c.cout = l == cfg.layers - 1 ? cfg.out_channels : cfg.hidden_channels;
    c.w_off = off;
    off += static_cast<std::size_t>(c.cout) * c.cin * k2;
    c.b_off = off;
    off += static_cast<std::size_t>(c.cout);
    convs_.push_back(c);

    if (cfg.use_film && l < cfg.layers - 1) {
      FilmShape f;
      f.ch = c.cout;
      f.w_scale_off = off;
      off += static_cast<std::size_t>(f.ch) * cfg.emb_dim;
      f.b_scale_off = off;
      off += static_cast<std::size_t>(f.ch);
      f.w_shift_off = off;
      off += static_cast<std::size_t>(f.ch) * cfg.emb_dim;
      f.b_shift_off = off;
      off += static_cast<std::size_t>(f.ch);
      films_.push_back(f);
    }
  }
  param_count_ = off;
}

std::vector<double> ConvStack::init_params(Rng& rng) const {
  std::vector<double> params(param_count_, 0.0);
  const int k2 = cfg_.kernel * cfg_.kernel;
  for (std::size_t l = 0; l < convs_.size(); ++l) {
    const ConvShape& c = convs_[l];
    const double bound = std::sqrt(1.0 / (static_cast<double>(c.cin) * k2));
    // The last conv starts at zero so the stack's initial output is zero.
    const double scale = (l + 1 == convs_.size()) ? 0.0 : bound;
    const std::size_t n_w = static_cast<std::size_t>(c.cout) * c.cin * k2;
    for (std::size_t i = 0; i < n_w; ++i) params[c.w_off + i] = scale * rng.uniform(-1.0, 1.0);
    // biases stay zero; FiLM weights stay zero (identity modulation).
  }
  return params;
}

void ConvStack::conv_forward(const std::vector<double>& params, const ConvShape& shape,
                             const Tensor& in, Tensor& out) const {
  const int k = cfg_.kernel;
  const int half = k / 2;
  const int rows = in.rows, cols = in.cols;
  out = Tensor(shape.cout, rows, cols);

  for (int co = 0; co < shape.cout; ++co) {
    const double b = params[shape.b_off + static_cast<std::size_t>(co)];
    double* out_base = &out.v[static_cast<std::size_t>(co) * rows * cols];
    for (std::size_t i = 0; i < static_cast<std::size_t>(rows) * cols; ++i) out_base[i] = b;

    const RowCorrelate correlate = pick_correlate(k);
    for (int ci = 0; ci < shape.cin; ++ci) {
      const double* in_base = &in.v[static_cast<std::size_t>(ci) * rows * cols];
      const std::size_t w_base =
          shape.w_off + (static_cast<std::size_t>(co) * shape.cin + ci) * k * k;
      for (int ky = 0; ky < k; ++ky) {
        const int dy = ky - half;
        const int r0 = std::max(0, -dy), r1 = std::min(rows, rows - dy);
        const double* wrow = &params[w_base + static_cast<std::size_t>(ky) * k];
        for (int r = r0; r < r1; ++r) {
          correlate(out_base + static_cast<std::size_t>(r) * cols,
                    in_base + static_cast<std::size_t>(r + dy) * cols, wrow, cols);
        }
      }
    }
  }
}

void ConvStack::conv_backward(const std::vector<double>& params, const ConvShape& shape,
                              const Tensor& in, const Tensor& gout,
                              std::vector<double>& gparams, Tensor* gin) const {
  const int k = cfg_.kernel;
  const int half = k / 2;
  const int rows = in.rows, cols = in.cols;

  for (int co = 0; co < shape.cout; ++co) {
    const double* g_base = &gout.v[static_cast<std::size_t>(co) * rows * cols];
    double bias_acc = 0.0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(rows) * cols; ++i) bias_acc += g_base[i];
    gparams[shape.b_off + static_cast<std::size_t>(co)] += bias_acc;

    const RowWeightGrads weight_grads = pick_weight_grads(k);
    const RowCorrelate convolve = pick_convolve(k);
    for (int ci = 0; ci < shape.cin; ++ci) {
      const double* in_base = &in.v[static_cast<std::size_t>(ci) * rows * cols];
      double* gin_base = gin ? &gin->v[static_cast<std::size_t>(ci) * rows * cols] : nullptr;
      const std::size_t w_base =
          shape.w_off + (static_cast<std::size_t>(co) * shape.cin + ci) * k * k;
      for (int ky = 0; ky < k; ++ky) {
        const int dy = ky - half;
        const int r0 = std::max(0, -dy), r1 = std::min(rows, rows - dy);
        const double* wrow = &params[w_base + static_cast<std::size_t>(ky) * k];
        double* wacc = &gparams[w_base + static_cast<std::size_t>(ky) * k];

        for (int r = r0; r < r1; ++r) {
          const double* grow = g_base + static_cast<std::size_t>(r) * cols;
          const double* irow = in_base + static_cast<std::size_t>(r + dy) * cols;
          // w_acc[j] += sum_c g[c] * in[c + j - half]
          weight_grads(grow, irow, wacc, cols);
          // gin[r + dy] += g[r] (*) flipped kernel row
          if (gin_base)
            convolve(gin_base + static_cast<std::size_t>(r + dy) * cols, grow, wrow, cols);
        }
      }
    }
  }
}

Tensor ConvStack::forward(const std::vector<double>& params, const Tensor& input,
                          const std::vector<double>& emb, StackCache* cache) const {
  if (input.ch != cfg_.in_channels)
    throw std::invalid_argument("conv stack: input channel mismatch");
  if (params.size() != param_count_)
    throw std::invalid_argument("conv stack: parameter vector size mismatch");
  if (cfg_.use_film && static_cast<int>(emb.size()) != cfg_.emb_dim)
    throw std::invalid_argument("conv stack: embedding size mismatch");

  if (cache) {
    cache->conv_in.clear();
    cache->conv_out.clear();
    cache->film_out.clear();
    cache->emb = emb;
  }

  Tensor cur = input;
  for (std::size_t l = 0; l < convs_.size(); ++l) {
    if (cache) cache->conv_in.push_back(cur);
    Tensor out;
    conv_forward(params, convs_[l], cur, out);
    const bool last = l + 1 == convs_.size();
    if (cache) cache->conv_out.push_back(last ? Tensor() : out);

    if (!last) {
      if (cfg_.use_film) {
        const FilmShape& f = films_[l];
        for (int c = 0; c < f.ch; ++c) {
          double scale = 1.0 + params[f.b_scale_off + static_cast<std::size_t>(c)];
          double shift = params[f.b_shift_off + static_cast<std::size_t>(c)];
          for (int j = 0; j < cfg_.emb_dim; ++j) {
            scale += params[f.w_scale_off + static_cast<std::size_t>(c) * cfg_.emb_dim + j] *
                     emb[static_cast<std::size_t>(j)];
            shift += params[f.w_shift_off + static_cast<std::size_t>(c) * cfg_.emb_dim + j] *
                     emb[static_cast<std::size_t>(j)];
          }
          double* base = &out.v[static_cast<std::size_t>(c) * out.rows * out.cols];
          const std::size_t plane = static_cast<std::size_t>(out.rows) * out.cols;
          for (std::size_t i = 0; i < plane; ++i) base[i] = scale * base[i] + shift;
        }
      }
      if (cache) cache->film_out.push_back(out);
      for (double& x : out.v) x = silu(x);
    }
    cur = std::move(out);
  }
  return cur;
}

void ConvStack::backward(const std::vector<double>& params, const StackCache& cache,
                         const Tensor& grad_out, std::vector<double>& grad_params,
                         Tensor* grad_input) const {
  if (grad_params.size() != param_count_)
    throw std::invalid_argument("conv stack: gradient vector size mismatch");

  Tensor g = grad_out;
  for (int l = static_cast<int>(convs_.size()) - 1; l >= 0; --l) {
    const bool last = l + 1 == static_cast<int>(convs_.size());
    if (!last) {
      // Through SiLU.
      const Tensor& pre = cache.film_out[static_cast<std::size_t>(l)];
      for (std::size_t i = 0; i < g.v.size(); ++i) g.v[i] *= silu_grad(pre.v[i]);

      if (cfg_.use_film) {
        const FilmShape& f = films_[static_cast<std::size_t>(l)];
        const Tensor& conv_out = cache.conv_out[static_cast<std::size_t>(l)];
        const std::size_t plane = static_cast<std::size_t>(g.rows) * g.cols;
        for (int c = 0; c < f.ch; ++c) {
          double scale = 1.0 + params[f.b_scale_off + static_cast<std::size_t>(c)];
          for (int j = 0; j < cfg_.emb_dim; ++j)
            scale += params[f.w_scale_off + static_cast<std::size_t>(c) * cfg_.emb_dim + j] *
                     cache.emb[static_cast<std::size_t>(j)];

          const double* x = &conv_out.v[static_cast<std::size_t>(c) * plane];
          double* gc = &g.v[static_cast<std::size_t>(c) * plane];
          double g_scale = 0.0, g_shift = 0.0;
          for (std::size_t i = 0; i < plane; ++i) {
            g_scale += gc[i] * x[i];
            g_shift += gc[i];
            gc[i] *= scale;
          }
          grad_params[f.b_scale_off + static_cast<std::size_t>(c)] += g_scale;
          grad_params[f.b_shift_off + static_cast<std::size_t>(c)] += g_shift;
          for (int j = 0; j < cfg_.emb_dim; ++j) {
            grad_params[f.w_scale_off + static_cast<std::size_t>(c) * cfg_.emb_dim + j] +=
                g_scale * cache.emb[static_cast<std::size_t>(j)];
            grad_params[f.w_shift_off + static_cast<std::size_t>(c) * cfg_.emb_dim + j] +=
                g_shift * cache.emb[static_cast<std::size_t>(j)];
          }
        }
      }
    }

    const Tensor& in = cache.conv_in[static_cast<std::size_t>(l)];
    const bool need_gin = l > 0 || grad_input != nullptr;
    Tensor gin;
    if (need_gin) gin = Tensor(in.ch, in.rows, in.cols);
    conv_backward(params, convs_[static_cast<std::size_t>(l)], in, g, grad_params,
                  need_gin ? &gin : nullptr);
    if (l == 0) {
      if (grad_input) *grad_input = std::move(gin);
    } else {
      g = std::move(gin);
    }
  }
}

void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& state,
               const AdamConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam: size mismatch");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

void ema_update(std::vector<double>& ema, const std::vector<double>& current, double decay) {
  if (ema.size() != current.size()) throw std::invalid_argument("ema: length mismatch");
  for (std::size_t i = 0; i < ema.size(); ++i)
    ema[i] = decay * ema[i] + (1.0 - decay) * current[i];
}

}  // namespace storm
