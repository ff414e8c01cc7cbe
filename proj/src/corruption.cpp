#include "storm/corruption.hpp"

#include <algorithm>
#include <cmath>

namespace storm {

namespace {

double signal_power(const Waveform& w) {
  double acc = 0.0;
  for (double s : w.samples) acc += s * s;
  return acc / static_cast<double>(w.samples.size());
}

void require_compatible(const Waveform& a, const Waveform& b, const char* op) {
  if (a.samples.size() != b.samples.size())
    throw std::invalid_argument(std::string(op) + ": length mismatch");
  if (a.sample_rate != b.sample_rate)
    throw std::invalid_argument(std::string(op) + ": sample rate mismatch");
}

}  // namespace

void validate(const CompressorParams& p) {
  if (p.ratio < 1.0) throw std::invalid_argument("compressor: ratio must be >= 1");
  if (p.attack_ms <= 0.0 || p.release_ms <= 0.0)
    throw std::invalid_argument("compressor: attack and release must be > 0");
  if (p.sidechain_gain <= 0.0)
    throw std::invalid_argument("compressor: sidechain gain must be > 0");
}

void validate(const CorruptionParams& p) {
  validate(p.compressor);
  if (!std::isfinite(p.snr_db)) throw std::invalid_argument("corruption: snr must be finite");
  if (p.eta <= 0.0 || p.eta > 1.0)
    throw std::invalid_argument("corruption: eta must be in (0, 1]");
}

CorruptionParams sample_corruption_params(Rng& rng, const CorruptionRanges& r) {
  CorruptionParams p;
  p.snr_db = rng.uniform(r.snr_min, r.snr_max);
  p.compressor.ratio = rng.uniform(r.ratio_min, r.ratio_max);
  p.compressor.sidechain_gain = rng.uniform(r.sidechain_gain_min, r.sidechain_gain_max);
  p.compressor.attack_ms = rng.uniform(r.attack_min_ms, r.attack_max_ms);
  p.compressor.release_ms = rng.uniform(r.release_min_ms, r.release_max_ms);
  p.compressor.threshold_db = rng.uniform(r.threshold_min_db, r.threshold_max_db);
  p.clip = rng.bernoulli(r.clip_probability);
  p.eta = p.clip ? rng.uniform(r.eta_min, r.eta_max) : 1.0;
  return p;
}

std::pair<Waveform, Waveform> mix_at_snr(const Waveform& speech, const Waveform& noise,
                                         double snr_db) {
  require_compatible(speech, noise, "mix_at_snr");
  const double p_speech = signal_power(speech);
  const double p_noise = signal_power(noise);
  if (p_speech <= 0.0) throw DataError("mix_at_snr: silent speech");
  if (p_noise <= 0.0) throw DataError("mix_at_snr: silent noise");

  // 10*log10(p_speech / (g^2 * p_noise)) = snr  =>  g = sqrt(p_speech / (p_noise * 10^(snr/10)))
  const double gain = std::sqrt(p_speech / (p_noise * std::pow(10.0, snr_db / 10.0)));

  Waveform scaled = noise;
  for (double& s : scaled.samples) s *= gain;
  Waveform noisy = speech;
  for (std::size_t i = 0; i < noisy.samples.size(); ++i) noisy.samples[i] += scaled.samples[i];
  return {std::move(noisy), std::move(scaled)};
}

std::vector<double> sidechain_gain_trajectory(const Waveform& sidechain,
                                              const CompressorParams& p, double sample_rate) {
  validate(p);
  const double alpha_a = std::exp(-1.0 / (sample_rate * p.attack_ms * 1e-3));
  const double alpha_r = std::exp(-1.0 / (sample_rate * p.release_ms * 1e-3));
  const double slope = 1.0 - 1.0 / p.ratio;

  std::vector<double> gains(sidechain.samples.size(), 1.0);
  double env = 0.0;
  for (std::size_t i = 0; i < sidechain.samples.size(); ++i) {
    const double level = std::abs(p.sidechain_gain * sidechain.samples[i]);
    const double alpha = level > env ? alpha_a : alpha_r;
    env = alpha * env + (1.0 - alpha) * level;

    const double level_db = 20.0 * std::log10(std::max(env, 1e-12));
    const double over_db = level_db - p.threshold_db;
    const double reduction_db = over_db > 0.0 ? over_db * slope : 0.0;
    gains[i] = std::pow(10.0, -reduction_db / 20.0);
  }
  return gains;
}

Waveform sidechain_compress(const Waveform& speech, const Waveform& sidechain,
                            const CompressorParams& p) {
  require_compatible(speech, sidechain, "sidechain_compress");
  const std::vector<double> gains = sidechain_gain_trajectory(sidechain, p, speech.sample_rate);
  Waveform out = speech;
  for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] *= gains[i];
  return out;
}

Waveform hard_clip(const Waveform& y, double eta) {
  if (eta <= 0.0 || eta > 1.0) throw std::invalid_argument("hard_clip: eta must be in (0, 1]");
  double peak = 0.0;
  for (double s : y.samples) peak = std::max(peak, std::abs(s));
  if (peak <= 0.0) throw DataError("hard_clip: silent input");

  const double bound = eta * peak;
  Waveform out = y;
  for (double& s : out.samples) s = std::clamp(s, -bound, bound);
  return out;
}

std::pair<Waveform, Waveform> corrupt(const Waveform& speech, const Waveform& noise,
                                      const CorruptionParams& p) {
  validate(p);
  auto [mix, scaled_noise] = mix_at_snr(speech, noise, p.snr_db);
  (void)mix;  // the additive mix only determines the noise scaling

  const Waveform compressed = sidechain_compress(speech, scaled_noise, p.compressor);
  Waveform noisy = compressed;
  for (std::size_t i = 0; i < noisy.samples.size(); ++i)
    noisy.samples[i] += scaled_noise.samples[i];

  if (p.clip) noisy = hard_clip(noisy, p.eta);
  return {std::move(noisy), speech};
}

}  // namespace storm
