#pragma once

#include "storm/score.hpp"
#include "storm/sde.hpp"
#include "storm/signal.hpp"

namespace storm {

/// Analysis/synthesis settings shared by training and inference.
struct FrontEnd {
  StftConfig stft;
  double warp_exponent = 0.5;
  double warp_scale = 0.15;
};

struct EnhanceStats {
  int predictor_calls = 0;
  int score_calls = 0;
  int total() const { return predictor_calls + score_calls; }
};

/// Two-stage enhancement: the predictor produces D(y), Gaussian noise
/// sigma(T) z is added to form the start sample, and the reverse diffusion
/// anchored at D(y) regenerates the clean estimate, conditioned on the
/// stack [y, D(y)]. Output has the same length as the input.
Waveform enhance_storm(const Waveform& noisy, const PredictorModel& predictor,
                       const ScoreModel& score, const OuveParams& p, const SamplerConfig& cfg,
                       const FrontEnd& fe, Rng& rng, EnhanceStats* stats = nullptr);

/// Purely generative path: the prior mean is the noisy spectrogram itself
/// and the conditioning stack is [y].
Waveform enhance_generative(const Waveform& noisy, const ScoreModel& score, const OuveParams& p,
                            const SamplerConfig& cfg, const FrontEnd& fe, Rng& rng,
                            EnhanceStats* stats = nullptr);

/// Purely predictive path: one forward pass through the same front-end.
Waveform enhance_predictive(const Waveform& noisy, const PredictorModel& predictor,
                            const FrontEnd& fe, EnhanceStats* stats = nullptr);

}  // namespace storm
