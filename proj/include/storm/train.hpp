#pragma once

#include <optional>
#include <string>
#include <vector>

#include "storm/score.hpp"
#include "storm/sde.hpp"

namespace storm {

struct TrainConfig {
  double learning_rate = 5e-4;
  int batch = 4;
  double ema_decay = 0.999;
  int patience = 10;          // epochs without val improvement before stopping
  double alpha = 1.0;         // weight of the supervised predictor term
  int max_epochs = 500;       // joint phase
  int pretrain_max_epochs = 500;
  int crop_frames = 256;
  double val_fraction = 0.1;
};

void validate(const TrainConfig& cfg);

/// One training utterance, already through the analysis front-end
/// (normalized, transformed, warped).
struct SpecPair {
  ComplexSpectrogram clean;
  ComplexSpectrogram noisy;
};

struct DsmDiagnostics {
  double tau = 0.0;
  double sigma = 0.0;
  double z_norm_sq = 0.0;  // ||z||^2 of the drawn complex noise
};

/// Denoising score-matching loss on one sample: draws tau ~ U(t_eps, t_max)
/// and z ~ N_C(0, I), forms x_tau = mu(x0, anchor, tau) + sigma(tau) z and
/// returns ||s(x_tau, cond, tau) + z / sigma(tau)||^2 (summed over bins).
/// Works with any ScoreModel; no gradients.
double dsm_loss_eval(const ScoreModel& score, const std::vector<cplx>& x0,
                     const std::vector<cplx>& anchor,
                     const std::vector<const std::vector<cplx>*>& conditioning, int bins,
                     int frames, const OuveParams& p, Rng& rng,
                     DsmDiagnostics* diag = nullptr);

/// Trainable variant: accumulates parameter gradients into grad_params.
/// The plain objective conditions on the noisy signal only (anchor = y,
/// conditioning = [y]).
double dsm_loss(TinyScoreNet& score, const std::vector<cplx>& x0, const std::vector<cplx>& y,
                int bins, int frames, const OuveParams& p, Rng& rng,
                std::vector<double>& grad_params, DsmDiagnostics* diag = nullptr);

/// Joint objective: DSM with the predictor output as process anchor and
/// [y, D(y)] as conditioning, plus alpha * ||x0 - D(y)||^2. Gradients flow
/// to both parameter sets (through the conditioning channels and the
/// perturbed-state construction as well as the supervised term).
double storm_loss(TinyScoreNet& score, PredictorNet& predictor, const std::vector<cplx>& x0,
                  const std::vector<cplx>& y, int bins, int frames, const OuveParams& p,
                  double alpha, Rng& rng, std::vector<double>& grad_score,
                  std::vector<double>& grad_predictor, DsmDiagnostics* diag = nullptr);

/// Complex-spectrogram MSE ||x0 - D(y)||^2 used for predictor pre-training.
double predictor_mse_loss(PredictorNet& predictor, const std::vector<cplx>& x0,
                          const std::vector<cplx>& y, int bins, int frames,
                          std::vector<double>& grad_predictor);

struct EpochRecord {
  int phase = 0;  // 0 = predictor pre-training, 1 = joint / score-only
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  std::vector<double> score_params, score_ema;
  std::vector<double> predictor_params, predictor_ema;
  std::vector<EpochRecord> history;
  bool diverged = false;
};

/// Two-phase training: predictor-only MSE pre-training (when a predictor is
/// given), then joint optimization of the combined objective. Adam with
/// bias correction, per-step EMA of all parameters, early stopping on the
/// validation loss. Per-epoch RNG streams are derived from `seed`, so runs
/// are reproducible and resumable. On a non-finite loss the last completed
/// epoch's parameters are restored and training stops.
TrainResult train(TinyScoreNet& score, PredictorNet* predictor,
                  const std::vector<SpecPair>& dataset, const TrainConfig& cfg,
                  const OuveParams& p, std::uint64_t seed);

/// Versioned binary checkpoint: model descriptors, raw + EMA parameters,
/// process parameters, and front-end settings. Loading rejects mismatched
/// architecture descriptors.
struct Checkpoint {
  OuveParams ouve;
  StftConfig stft;
  double warp_exponent = 0.5;
  double warp_scale = 0.15;
  std::string score_descriptor;
  std::vector<double> score_params, score_ema;
  bool has_predictor = false;
  std::string predictor_descriptor;
  std::vector<double> predictor_params, predictor_ema;
  std::string rng_state;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace storm
