#include "storm/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

namespace storm {

void validate(const TrainConfig& cfg) {
  if (cfg.learning_rate <= 0.0) throw std::invalid_argument("train: learning rate must be > 0");
  if (cfg.batch < 1) throw std::invalid_argument("train: batch must be >= 1");
  if (cfg.ema_decay < 0.0 || cfg.ema_decay >= 1.0)
    throw std::invalid_argument("train: ema decay must be in [0, 1)");
  if (cfg.patience < 1) throw std::invalid_argument("train: patience must be >= 1");
  if (cfg.alpha < 0.0) throw std::invalid_argument("train: alpha must be >= 0");
  if (cfg.crop_frames < 1) throw std::invalid_argument("train: crop_frames must be >= 1");
  if (cfg.val_fraction < 0.0 || cfg.val_fraction >= 1.0)
    throw std::invalid_argument("train: val_fraction must be in [0, 1)");
}

namespace {

struct DsmSample {
  double tau, sigma;
  std::vector<cplx> z;
  std::vector<cplx> x_tau;
};

DsmSample draw_dsm_sample(const std::vector<cplx>& x0, const std::vector<cplx>& anchor,
                          const OuveParams& p, Rng& rng) {
  DsmSample s;
  s.tau = rng.uniform(p.t_eps, p.t_max);
  s.sigma = kernel_std(s.tau, p);
  s.z.resize(x0.size());
  for (cplx& c : s.z) c = rng.normal_complex();
  s.x_tau = kernel_mean(x0, anchor, s.tau, p);
  for (std::size_t i = 0; i < s.x_tau.size(); ++i) s.x_tau[i] += s.sigma * s.z[i];
  return s;
}

void fill_diag(DsmDiagnostics* diag, const DsmSample& s) {
  if (!diag) return;
  diag->tau = s.tau;
  diag->sigma = s.sigma;
  diag->z_norm_sq = 0.0;
  for (const cplx& c : s.z) diag->z_norm_sq += std::norm(c);
}

// residual r = s + z/sigma; loss = sum |r|^2.
double residual_loss(const std::vector<cplx>& score_out, const DsmSample& s,
                     std::vector<cplx>* residual) {
  double loss = 0.0;
  if (residual) residual->resize(score_out.size());
  for (std::size_t i = 0; i < score_out.size(); ++i) {
    const cplx r = score_out[i] + s.z[i] / s.sigma;
    loss += std::norm(r);
    if (residual) (*residual)[i] = r;
  }
  if (!std::isfinite(loss))
    throw NumericError("dsm loss: non-finite at tau=" + std::to_string(s.tau) +
                       " sigma=" + std::to_string(s.sigma));
  return loss;
}

}  // namespace

double dsm_loss_eval(const ScoreModel& score, const std::vector<cplx>& x0,
                     const std::vector<cplx>& anchor,
                     const std::vector<const std::vector<cplx>*>& conditioning, int bins,
                     int frames, const OuveParams& p, Rng& rng, DsmDiagnostics* diag) {
  if (x0.size() != anchor.size()) throw std::invalid_argument("dsm loss: shape mismatch");
  const DsmSample s = draw_dsm_sample(x0, anchor, p, rng);
  fill_diag(diag, s);
  const std::vector<cplx> out = score.evaluate(s.x_tau, bins, frames, conditioning, s.tau, s.sigma);
  return residual_loss(out, s, nullptr);
}

double dsm_loss(TinyScoreNet& score, const std::vector<cplx>& x0, const std::vector<cplx>& y,
                int bins, int frames, const OuveParams& p, Rng& rng,
                std::vector<double>& grad_params, DsmDiagnostics* diag) {
  if (x0.size() != y.size()) throw std::invalid_argument("dsm loss: shape mismatch");
  const DsmSample s = draw_dsm_sample(x0, y, p, rng);
  fill_diag(diag, s);

  StackCache cache;
  const std::vector<cplx> out = score.forward_cached(s.x_tau, bins, frames, {&y}, s.sigma, cache);
  std::vector<cplx> r;
  const double loss = residual_loss(out, s, &r);

  for (cplx& c : r) c *= 2.0;  // d|r|^2/dr
  score.backward(cache, r, bins, frames, s.sigma, grad_params, nullptr);
  return loss;
}

double storm_loss(TinyScoreNet& score, PredictorNet& predictor, const std::vector<cplx>& x0,
                  const std::vector<cplx>& y, int bins, int frames, const OuveParams& p,
                  double alpha, Rng& rng, std::vector<double>& grad_score,
                  std::vector<double>& grad_predictor, DsmDiagnostics* diag) {
  if (x0.size() != y.size()) throw std::invalid_argument("storm loss: shape mismatch");

  StackCache pred_cache;
  const std::vector<cplx> d = predictor.forward_cached(y, bins, frames, pred_cache);

  const DsmSample s = draw_dsm_sample(x0, d, p, rng);
  fill_diag(diag, s);

  StackCache score_cache;
  const std::vector<cplx> out =
      score.forward_cached(s.x_tau, bins, frames, {&y, &d}, s.sigma, score_cache);
  std::vector<cplx> r;
  double loss = residual_loss(out, s, &r);

  for (cplx& c : r) c *= 2.0;
  Tensor grad_inputs;
  score.backward(score_cache, r, bins, frames, s.sigma, grad_score, &grad_inputs);

  // Gradient w.r.t. D(y): the conditioning channels (4,5) plus the
  // perturbed-state channels (0,1) weighted by d(x_tau)/d(anchor), plus the
  // supervised term.
  const double anchor_weight = 1.0 - std::exp(-p.gamma * s.tau);
  std::vector<cplx> grad_d = tensor_to_complex(grad_inputs, 4);
  const std::vector<cplx> grad_xtau = tensor_to_complex(grad_inputs, 0);
  for (std::size_t i = 0; i < grad_d.size(); ++i) grad_d[i] += anchor_weight * grad_xtau[i];

  double sup = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const cplx e = d[i] - x0[i];
    sup += std::norm(e);
    grad_d[i] += alpha * 2.0 * e;
  }
  loss += alpha * sup;
  if (!std::isfinite(loss)) throw NumericError("storm loss: non-finite supervised term");

  predictor.backward(pred_cache, grad_d, bins, frames, grad_predictor);
  return loss;
}

double predictor_mse_loss(PredictorNet& predictor, const std::vector<cplx>& x0,
                          const std::vector<cplx>& y, int bins, int frames,
                          std::vector<double>& grad_predictor) {
  if (x0.size() != y.size()) throw std::invalid_argument("mse loss: shape mismatch");
  StackCache cache;
  const std::vector<cplx> d = predictor.forward_cached(y, bins, frames, cache);
  double loss = 0.0;
  std::vector<cplx> g(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const cplx e = d[i] - x0[i];
    loss += std::norm(e);
    g[i] = 2.0 * e;
  }
  if (!std::isfinite(loss)) throw NumericError("mse loss: non-finite");
  predictor.backward(cache, g, bins, frames, grad_predictor);
  return loss;
}

namespace {

struct Split {
  std::vector<std::size_t> train, val;
};

Split split_dataset(std::size_t n, double val_fraction) {
  Split s;
  auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * val_fraction));
  if (n >= 2 && n_val == 0 && val_fraction > 0.0) n_val = 1;
  for (std::size_t i = 0; i < n - n_val; ++i) s.train.push_back(i);
  for (std::size_t i = n - n_val; i < n; ++i) s.val.push_back(i);
  if (s.val.empty()) s.val = s.train;  // degenerate fallback: validate on train
  return s;
}

void permute(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i)
    std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);
}

std::pair<std::vector<cplx>, std::vector<cplx>> crop_pair_data(const SpecPair& pair,
                                                               int n_frames, Rng& rng) {
  const int slack = std::max(0, pair.clean.frames - n_frames);
  const int offset = slack > 0 ? rng.uniform_int(0, slack) : 0;
  ComplexSpectrogram c = crop_frames(pair.clean, n_frames, offset);
  ComplexSpectrogram n = crop_frames(pair.noisy, n_frames, offset);
  return {std::move(c.data), std::move(n.data)};
}

}  // namespace

TrainResult train(TinyScoreNet& score, PredictorNet* predictor,
                  const std::vector<SpecPair>& dataset, const TrainConfig& cfg,
                  const OuveParams& p, std::uint64_t seed) {
  validate(cfg);
  validate(p);
  if (dataset.empty()) throw DataError("train: empty dataset");
  for (const SpecPair& pair : dataset)
    if (pair.clean.bins != pair.noisy.bins || pair.clean.frames != pair.noisy.frames)
      throw std::invalid_argument("train: clean/noisy shape mismatch");

  const int bins = dataset.front().clean.bins;
  const int crop = cfg.crop_frames;
  const Split split = split_dataset(dataset.size(), cfg.val_fraction);

  TrainResult result;
  const AdamConfig adam_cfg{cfg.learning_rate, 0.9, 0.999, 1e-8};

  auto run_phase = [&](int phase, int max_epochs, auto&& train_step, auto&& val_loss_fn) {
    double best_val = std::numeric_limits<double>::infinity();
    int since_improve = 0;

    std::vector<double> snapshot_score = score.params();
    std::vector<double> snapshot_pred = predictor ? predictor->params() : std::vector<double>{};

    for (int epoch = 0; epoch < max_epochs; ++epoch) {
      Rng epoch_rng(derive_seed(derive_seed(seed, static_cast<std::uint64_t>(phase) + 7919),
                                static_cast<std::uint64_t>(epoch)));
      std::vector<std::size_t> order = split.train;
      permute(order, epoch_rng);

      double train_loss = 0.0;
      std::size_t batches = 0;
      bool bad = false;
      for (std::size_t pos = 0; pos < order.size() && !bad; pos += cfg.batch) {
        const std::size_t end = std::min(order.size(), pos + cfg.batch);
        try {
          train_loss += train_step(order, pos, end, epoch_rng);
        } catch (const NumericError&) {
          bad = true;
        }
        ++batches;
      }
      double val = std::numeric_limits<double>::quiet_NaN();
      if (!bad && std::isfinite(train_loss)) {
        Rng val_rng(derive_seed(seed, 0xA11DA7AULL ^ static_cast<std::uint64_t>(phase)));
        try {
          val = val_loss_fn(val_rng);
        } catch (const NumericError&) {
          bad = true;
        }
      }
      if (bad || !std::isfinite(train_loss) || !std::isfinite(val)) {
        // Divergence: restore the last completed epoch and stop.
        score.set_params(snapshot_score);
        if (predictor) predictor->set_params(snapshot_pred);
        result.diverged = true;
        return;
      }
      train_loss /= static_cast<double>(std::max<std::size_t>(batches, 1));

      result.history.push_back({phase, epoch, train_loss, val});
      snapshot_score = score.params();
      if (predictor) snapshot_pred = predictor->params();

      if (val < best_val - 1e-12) {
        best_val = val;
        since_improve = 0;
      } else {
        ++since_improve;
        if (since_improve >= cfg.patience) break;
      }
    }
  };

  // --- Phase 0: predictor pre-training (complex spectrogram MSE). ---
  if (predictor) {
    AdamState adam;
    adam.init(predictor->param_count());
    std::vector<double> ema = predictor->params();
    std::vector<double> grads(predictor->param_count());

    auto step = [&](const std::vector<std::size_t>& order, std::size_t pos, std::size_t end,
                    Rng& rng) {
      std::fill(grads.begin(), grads.end(), 0.0);
      double loss = 0.0;
      for (std::size_t i = pos; i < end; ++i) {
        auto [x0, y] = crop_pair_data(dataset[order[i]], crop, rng);
        loss += predictor_mse_loss(*predictor, x0, y, bins, crop, grads);
      }
      const double inv = 1.0 / static_cast<double>(end - pos);
      for (double& g : grads) g *= inv;
      adam_step(predictor->params(), grads, adam, adam_cfg);
      ema_update(ema, predictor->params(), cfg.ema_decay);
      return loss * inv;
    };

    auto val_loss = [&](Rng& rng) {
      double loss = 0.0;
      std::vector<double> scratch(predictor->param_count(), 0.0);
      for (std::size_t i : split.val) {
        auto [x0, y] = crop_pair_data(dataset[i], crop, rng);
        loss += predictor_mse_loss(*predictor, x0, y, bins, crop, scratch);
      }
      return loss / static_cast<double>(split.val.size());
    };

    run_phase(0, cfg.pretrain_max_epochs, step, val_loss);
    result.predictor_ema = ema;
    if (result.diverged) {
      result.score_params = score.params();
      result.score_ema = score.params();
      result.predictor_params = predictor->params();
      return result;
    }
  }

  // --- Phase 1: joint objective (or score-only DSM without a predictor). ---
  {
    AdamState adam_s;
    adam_s.init(score.param_count());
    AdamState adam_p;
    if (predictor) adam_p.init(predictor->param_count());
    std::vector<double> ema_s = score.params();
    std::vector<double> ema_p = predictor ? predictor->params() : std::vector<double>{};
    std::vector<double> grads_s(score.param_count());
    std::vector<double> grads_p(predictor ? predictor->param_count() : 0);

    auto step = [&](const std::vector<std::size_t>& order, std::size_t pos, std::size_t end,
                    Rng& rng) {
      std::fill(grads_s.begin(), grads_s.end(), 0.0);
      std::fill(grads_p.begin(), grads_p.end(), 0.0);
      double loss = 0.0;
      for (std::size_t i = pos; i < end; ++i) {
        auto [x0, y] = crop_pair_data(dataset[order[i]], crop, rng);
        if (predictor) {
          loss += storm_loss(score, *predictor, x0, y, bins, crop, p, cfg.alpha, rng, grads_s,
                             grads_p, nullptr);
        } else {
          loss += dsm_loss(score, x0, y, bins, crop, p, rng, grads_s, nullptr);
        }
      }
      const double inv = 1.0 / static_cast<double>(end - pos);
      for (double& g : grads_s) g *= inv;
      adam_step(score.params(), grads_s, adam_s, adam_cfg);
      ema_update(ema_s, score.params(), cfg.ema_decay);
      if (predictor) {
        for (double& g : grads_p) g *= inv;
        adam_step(predictor->params(), grads_p, adam_p, adam_cfg);
        ema_update(ema_p, predictor->params(), cfg.ema_decay);
      }
      return loss * inv;
    };

    auto val_loss = [&](Rng& rng) {
      double loss = 0.0;
      std::vector<double> scratch_s(score.param_count(), 0.0);
      std::vector<double> scratch_p(predictor ? predictor->param_count() : 0, 0.0);
      for (std::size_t i : split.val) {
        auto [x0, y] = crop_pair_data(dataset[i], crop, rng);
        if (predictor) {
          loss += storm_loss(score, *predictor, x0, y, bins, crop, p, cfg.alpha, rng, scratch_s,
                             scratch_p, nullptr);
        } else {
          loss += dsm_loss(score, x0, y, bins, crop, p, rng, scratch_s, nullptr);
        }
      }
      return loss / static_cast<double>(split.val.size());
    };

    run_phase(1, cfg.max_epochs, step, val_loss);
    result.score_ema = ema_s;
    if (predictor) result.predictor_ema = ema_p;
  }

  result.score_params = score.params();
  if (predictor) result.predictor_params = predictor->params();
  if (result.score_ema.empty()) result.score_ema = result.score_params;
  if (predictor && result.predictor_ema.empty()) result.predictor_ema = result.predictor_params;
  return result;
}

// ---------------------------------------------------------------------------
// Checkpoint container
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'S', 'T', 'R', 'M', 'C', 'K', 'P', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void write_f64(std::ostream& os, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  write_u64(os, v);
}

double read_f64(std::istream& is) {
  const std::uint64_t v = read_u64(is);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

void write_string(std::ostream& os, const std::string& s) {
  write_u64(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
  const std::uint64_t n = read_u64(is);
  if (n > (1ull << 24)) throw DataError("checkpoint: implausible string length");
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  return s;
}

void write_vec(std::ostream& os, const std::vector<double>& v) {
  write_u64(os, v.size());
  for (double d : v) write_f64(os, d);
}

std::vector<double> read_vec(std::istream& is) {
  const std::uint64_t n = read_u64(is);
  if (n > (1ull << 28)) throw DataError("checkpoint: implausible vector length");
  std::vector<double> v(n);
  for (auto& d : v) d = read_f64(is);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("checkpoint: cannot write " + path);
  os.write(kMagic, 8);
  write_u64(os, 1);  // version
  write_f64(os, ckpt.ouve.gamma);
  write_f64(os, ckpt.ouve.sigma_min);
  write_f64(os, ckpt.ouve.sigma_max);
  write_f64(os, ckpt.ouve.t_max);
  write_f64(os, ckpt.ouve.t_eps);
  write_u64(os, static_cast<std::uint64_t>(ckpt.stft.window_len));
  write_u64(os, static_cast<std::uint64_t>(ckpt.stft.hop));
  write_f64(os, ckpt.warp_exponent);
  write_f64(os, ckpt.warp_scale);
  write_string(os, ckpt.score_descriptor);
  write_vec(os, ckpt.score_params);
  write_vec(os, ckpt.score_ema);
  write_u64(os, ckpt.has_predictor ? 1 : 0);
  if (ckpt.has_predictor) {
    write_string(os, ckpt.predictor_descriptor);
    write_vec(os, ckpt.predictor_params);
    write_vec(os, ckpt.predictor_ema);
  }
  write_string(os, ckpt.rng_state);
  if (!os) throw DataError("checkpoint: short write to " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("checkpoint: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw DataError("checkpoint: bad magic in " + path);
  const std::uint64_t version = read_u64(is);
  if (version != 1) throw DataError("checkpoint: unsupported version");

  Checkpoint c;
  c.ouve.gamma = read_f64(is);
  c.ouve.sigma_min = read_f64(is);
  c.ouve.sigma_max = read_f64(is);
  c.ouve.t_max = read_f64(is);
  c.ouve.t_eps = read_f64(is);
  c.stft.window_len = static_cast<int>(read_u64(is));
  c.stft.hop = static_cast<int>(read_u64(is));
  c.warp_exponent = read_f64(is);
  c.warp_scale = read_f64(is);
  c.score_descriptor = read_string(is);
  c.score_params = read_vec(is);
  c.score_ema = read_vec(is);
  c.has_predictor = read_u64(is) != 0;
  if (c.has_predictor) {
    c.predictor_descriptor = read_string(is);
    c.predictor_params = read_vec(is);
    c.predictor_ema = read_vec(is);
  }
  c.rng_state = read_string(is);
  if (!is) throw DataError("checkpoint: truncated file " + path);
  return c;
}

}  // namespace storm
