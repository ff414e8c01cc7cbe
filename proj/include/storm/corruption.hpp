#pragma once

#include <utility>

#include "storm/common.hpp"
#include "storm/signal.hpp"

namespace storm {

/// Feed-forward dynamic-range compressor settings. The detector runs on the
/// sidechain signal scaled by sidechain_gain; the static curve is hard-knee.
struct CompressorParams {
  double threshold_db = -20.0;  // dBFS
  double ratio = 4.0;           // >= 1
  double attack_ms = 10.0;
  double release_ms = 100.0;
  double sidechain_gain = 1.0;
};

void validate(const CompressorParams& p);

struct CorruptionParams {
  double snr_db = 0.0;
  CompressorParams compressor;
  bool clip = false;
  double eta = 1.0;  // clipping threshold, (0, 1]
};

void validate(const CorruptionParams& p);

/// Sampling ranges for corruption parameters. Defaults follow the data
/// generation recipe: SNR U(-6,14) dB, ratio U(1,20), attack U(5,100) ms,
/// release U(5,500) ms, sidechain gain U(0.8,1.2), clipping present with
/// probability 0.75, eta U(0.85,1.0). The compressor threshold is drawn
/// from U(-30,-10) dBFS.
struct CorruptionRanges {
  double snr_min = -6.0, snr_max = 14.0;
  double ratio_min = 1.0, ratio_max = 20.0;
  double attack_min_ms = 5.0, attack_max_ms = 100.0;
  double release_min_ms = 5.0, release_max_ms = 500.0;
  double sidechain_gain_min = 0.8, sidechain_gain_max = 1.2;
  double threshold_min_db = -30.0, threshold_max_db = -10.0;
  double clip_probability = 0.75;
  double eta_min = 0.85, eta_max = 1.0;
};

CorruptionParams sample_corruption_params(Rng& rng, const CorruptionRanges& ranges = {});

/// Scales the noise so that 10*log10(P_speech / P_noise) equals snr_db
/// exactly, then mixes. Returns (speech + scaled_noise, scaled_noise).
std::pair<Waveform, Waveform> mix_at_snr(const Waveform& speech, const Waveform& noise,
                                         double snr_db);

/// Gain reduction on `speech` driven by the level of `sidechain`. Peak
/// detector with one-pole attack/release ballistics; static curve in dB:
/// reduction = (L - T) * (1 - 1/ratio) for detector level L above T.
Waveform sidechain_compress(const Waveform& speech, const Waveform& sidechain,
                            const CompressorParams& p);

/// Computes the per-sample compressor gain trajectory (diagnostics/tests).
std::vector<double> sidechain_gain_trajectory(const Waveform& sidechain,
                                              const CompressorParams& p,
                                              double sample_rate);

/// Clamps to +-eta * max|y|, the bound computed once from the current input.
Waveform hard_clip(const Waveform& y, double eta);

/// Full corruption chain: SNR mixing determines the noise scaling, the
/// speech path is compressed with the scaled noise as sidechain, the
/// compressed speech plus scaled noise is optionally hard-clipped.
/// Returns (noisy, clean_aligned) where clean_aligned is the uncompressed
/// input speech (the enhancement target).
std::pair<Waveform, Waveform> corrupt(const Waveform& speech, const Waveform& noise,
                                      const CorruptionParams& p);

}  // namespace storm
