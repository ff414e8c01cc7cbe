#pragma once

#include <string>
#include <vector>

#include "storm/corruption.hpp"
#include "storm/pipeline.hpp"
#include "storm/signal.hpp"
#include "storm/train.hpp"
#include "storm/wind.hpp"

namespace storm {

/// Voice-like test signal: a harmonic source with a drifting pitch contour,
/// shaped by randomly placed formant resonances and a syllabic amplitude
/// envelope, plus a little breath noise.
Waveform synthesize_toy_speech(double duration, double sample_rate, Rng& rng);

struct CorpusConfig {
  int count = 200;
  double duration = 2.0;  // s per clip
  double sample_rate = 16000.0;
  WindSamplingRanges wind;
  CorruptionRanges corruption;
  std::string recorded_noise_dir;  // when set, replaces wind synthesis
};

/// Generates paired clean/noisy clips under out_dir/clean and out_dir/noisy
/// plus a line-delimited manifest with every sampled corruption parameter.
/// Fully reproducible: clip i uses an RNG seeded from (seed, i).
void synthesize_corpus(const CorpusConfig& cfg, const std::string& out_dir, std::uint64_t seed);

/// Loads (clean, noisy) waveform pairs; files are matched by name and
/// ordered lexicographically.
std::vector<std::pair<Waveform, Waveform>> load_corpus_pairs(const std::string& dir);

/// Applies the training front-end to a waveform pair: normalize by the
/// noisy peak, transform, warp.
SpecPair make_training_pair(const Waveform& clean, const Waveform& noisy, const FrontEnd& fe);

/// Sorted list of .wav files in a directory.
std::vector<std::string> list_wav_files(const std::string& dir);

}  // namespace storm
