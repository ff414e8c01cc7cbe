#pragma once

#include <cstdint>
#include <tuple>
#include <vector>

#include "storm/common.hpp"

namespace storm {

/// Mono time-domain signal. Samples are dimensionless amplitudes,
/// nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  double sample_rate = 16000.0;

  std::size_t size() const { return samples.size(); }
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

void validate(const Waveform& w);

/// Analysis/synthesis configuration. The taper is always a square-root
/// periodic Hann window of length window_len.
struct StftConfig {
  int window_len = 510;
  int hop = 128;

  int bins() const { return window_len / 2 + 1; }
};

void validate(const StftConfig& cfg);

std::vector<double> sqrt_hann_window(int len);

/// Complex time-frequency array, bin-major per frame:
/// data[frame * bins + bin]. Carries enough metadata for an exact-length
/// inverse transform and for undoing amplitude warping.
struct ComplexSpectrogram {
  int bins = 0;
  int frames = 0;
  std::vector<cplx> data;

  StftConfig config;
  bool warped = false;
  double warp_exponent = 0.5;
  double warp_scale = 1.0;
  // Zero-padding applied before analysis (samples), and source length,
  // recorded so istft can trim back to the original extent.
  int pad_left = 0;
  int pad_right = 0;
  std::int64_t source_len = 0;

  cplx& at(int frame, int bin) { return data[static_cast<std::size_t>(frame) * bins + bin]; }
  const cplx& at(int frame, int bin) const {
    return data[static_cast<std::size_t>(frame) * bins + bin];
  }
  std::size_t size() const { return data.size(); }
};

/// Forward STFT. The signal is zero-padded by (window_len - hop) samples on
/// both sides so that istft can reconstruct the full original extent.
/// Throws std::invalid_argument for signals shorter than one window.
ComplexSpectrogram stft(const Waveform& w, const StftConfig& cfg);

/// Least-squares overlap-add inverse with window-sum-squares normalization.
/// out_len must not exceed the extent covered by the frames.
Waveform istft(const ComplexSpectrogram& s, std::int64_t out_len,
               double sample_rate = 16000.0);

/// Magnitude warping: c -> scale * |c|^exponent * exp(i*angle(c)).
ComplexSpectrogram warp(const ComplexSpectrogram& s, double exponent = 0.5,
                        double scale = 1.0);

/// Exact inverse of warp.
ComplexSpectrogram unwarp(const ComplexSpectrogram& s);

/// Scales both signals by 1/max|y| and returns the applied gain.
/// Throws DataError when the noisy signal is silent.
std::tuple<Waveform, Waveform, double> normalize_by_noisy_max(const Waveform& x,
                                                              const Waveform& y);

/// Contiguous crop of `frames` frames at the given offset. Inputs shorter
/// than requested are zero-padded on the right.
ComplexSpectrogram crop_frames(const ComplexSpectrogram& s, int frames, int offset);

/// Crop at a uniformly random offset in [0, s.frames - frames].
ComplexSpectrogram crop_random_frames(const ComplexSpectrogram& s, int frames, Rng& rng);

/// Same random offset applied to a pair (training pairs must stay aligned).
std::pair<ComplexSpectrogram, ComplexSpectrogram> crop_random_frames_pair(
    const ComplexSpectrogram& a, const ComplexSpectrogram& b, int frames, Rng& rng);

}  // namespace storm
