#include "storm/signal.hpp"

#include <algorithm>
#include <cmath>

#include "fft.hpp"

namespace storm {

void validate(const Waveform& w) {
  if (w.sample_rate <= 0.0) throw std::invalid_argument("waveform: sample_rate must be > 0");
  if (!all_finite(w.samples)) throw std::invalid_argument("waveform: non-finite samples");
}

void validate(const StftConfig& cfg) {
  if (cfg.window_len <= 0 || cfg.hop <= 0 || cfg.hop > cfg.window_len)
    throw std::invalid_argument("stft config: need 0 < hop <= window_len");
}

std::vector<double> sqrt_hann_window(int len) {
  std::vector<double> w(static_cast<std::size_t>(len));
  for (int n = 0; n < len; ++n) {
    const double hann = 0.5 * (1.0 - std::cos(2.0 * M_PI * n / len));
    w[static_cast<std::size_t>(n)] = std::sqrt(hann);
  }
  return w;
}

ComplexSpectrogram stft(const Waveform& w, const StftConfig& cfg) {
  validate(cfg);
  validate(w);
  const int win = cfg.window_len;
  const int hop = cfg.hop;
  const auto len = static_cast<std::int64_t>(w.samples.size());
  if (len < win) throw std::invalid_argument("stft: signal shorter than one window");

  const int pad = win - hop;
  const std::int64_t padded_len = len + 2 * pad;
  const int frames = static_cast<int>((padded_len - win) / hop) + 1;

  std::vector<double> padded(static_cast<std::size_t>(padded_len), 0.0);
  std::copy(w.samples.begin(), w.samples.end(), padded.begin() + pad);

  const std::vector<double> window = sqrt_hann_window(win);
  RealFft fft(win);

  ComplexSpectrogram s;
  s.bins = cfg.bins();
  s.frames = frames;
  s.config = cfg;
  s.pad_left = pad;
  s.pad_right = pad;
  s.source_len = len;
  s.data.resize(static_cast<std::size_t>(frames) * s.bins);

  std::vector<double> frame(static_cast<std::size_t>(win));
  for (int f = 0; f < frames; ++f) {
    const std::int64_t start = static_cast<std::int64_t>(f) * hop;
    for (int n = 0; n < win; ++n)
      frame[static_cast<std::size_t>(n)] =
          padded[static_cast<std::size_t>(start + n)] * window[static_cast<std::size_t>(n)];
    fft.forward(frame.data(), &s.data[static_cast<std::size_t>(f) * s.bins]);
  }
  return s;
}

Waveform istft(const ComplexSpectrogram& s, std::int64_t out_len, double sample_rate) {
  if (s.warped) throw std::invalid_argument("istft: input spectrogram is warped");
  validate(s.config);
  if (s.bins != s.config.bins())
    throw std::invalid_argument("istft: bin count inconsistent with config");
  if (out_len < 0) throw std::invalid_argument("istft: negative output length");

  const int win = s.config.window_len;
  const int hop = s.config.hop;
  const std::int64_t covered = static_cast<std::int64_t>(s.frames - 1) * hop + win;
  if (s.pad_left + out_len > covered)
    throw std::invalid_argument("istft: out_len exceeds the extent covered by the frames");

  const std::vector<double> window = sqrt_hann_window(win);
  RealFft fft(win);

  std::vector<double> acc(static_cast<std::size_t>(covered), 0.0);
  std::vector<double> wss(static_cast<std::size_t>(covered), 0.0);
  std::vector<double> frame(static_cast<std::size_t>(win));

  for (int f = 0; f < s.frames; ++f) {
    fft.inverse(&s.data[static_cast<std::size_t>(f) * s.bins], frame.data());
    const std::int64_t start = static_cast<std::int64_t>(f) * hop;
    for (int n = 0; n < win; ++n) {
      const double wn = window[static_cast<std::size_t>(n)];
      acc[static_cast<std::size_t>(start + n)] += frame[static_cast<std::size_t>(n)] * wn;
      wss[static_cast<std::size_t>(start + n)] += wn * wn;
    }
  }

  Waveform out;
  out.sample_rate = sample_rate;
  out.samples.resize(static_cast<std::size_t>(out_len));
  for (std::int64_t i = 0; i < out_len; ++i) {
    const auto p = static_cast<std::size_t>(s.pad_left + i);
    if (wss[p] <= 1e-12)
      throw NumericError("istft: window-sum-squares vanishes inside requested output");
    out.samples[static_cast<std::size_t>(i)] = acc[p] / wss[p];
  }
  return out;
}

ComplexSpectrogram warp(const ComplexSpectrogram& s, double exponent, double scale) {
  if (s.warped) throw std::invalid_argument("warp: spectrogram already warped");
  if (exponent <= 0.0) throw std::invalid_argument("warp: exponent must be > 0");
  if (scale <= 0.0) throw std::invalid_argument("warp: scale must be > 0");

  ComplexSpectrogram out = s;
  out.warped = true;
  out.warp_exponent = exponent;
  out.warp_scale = scale;
  for (cplx& c : out.data) {
    const double mag = std::abs(c);
    if (mag == 0.0) {
      c = 0.0;
    } else {
      c *= scale * std::pow(mag, exponent) / mag;
    }
  }
  return out;
}

ComplexSpectrogram unwarp(const ComplexSpectrogram& s) {
  if (!s.warped) throw std::invalid_argument("unwarp: spectrogram is not warped");
  ComplexSpectrogram out = s;
  out.warped = false;
  const double inv_exp = 1.0 / s.warp_exponent;
  for (cplx& c : out.data) {
    const double mag = std::abs(c);
    if (mag == 0.0) {
      c = 0.0;
    } else {
      c *= std::pow(mag / s.warp_scale, inv_exp) / mag;
    }
  }
  return out;
}

std::tuple<Waveform, Waveform, double> normalize_by_noisy_max(const Waveform& x,
                                                              const Waveform& y) {
  validate(x);
  validate(y);
  double peak = 0.0;
  for (double v : y.samples) peak = std::max(peak, std::abs(v));
  if (peak <= 0.0) throw DataError("normalize: noisy utterance is silent");

  const double gain = 1.0 / peak;
  Waveform xs = x, ys = y;
  for (double& v : xs.samples) v *= gain;
  for (double& v : ys.samples) v *= gain;
  return {std::move(xs), std::move(ys), gain};
}

ComplexSpectrogram crop_frames(const ComplexSpectrogram& s, int frames, int offset) {
  if (s.frames < 1) throw std::invalid_argument("crop: empty spectrogram");
  if (frames < 1) throw std::invalid_argument("crop: need at least one frame");
  if (offset < 0 || (s.frames > frames && offset > s.frames - frames))
    throw std::invalid_argument("crop: offset out of range");

  ComplexSpectrogram out = s;
  out.frames = frames;
  out.data.assign(static_cast<std::size_t>(frames) * s.bins, cplx(0.0, 0.0));
  const int avail = std::min(frames, s.frames - offset);
  for (int f = 0; f < avail; ++f)
    std::copy_n(&s.data[static_cast<std::size_t>(offset + f) * s.bins], s.bins,
                &out.data[static_cast<std::size_t>(f) * s.bins]);
  return out;
}

ComplexSpectrogram crop_random_frames(const ComplexSpectrogram& s, int frames, Rng& rng) {
  const int slack = std::max(0, s.frames - frames);
  const int offset = slack > 0 ? rng.uniform_int(0, slack) : 0;
  return crop_frames(s, frames, offset);
}

std::pair<ComplexSpectrogram, ComplexSpectrogram> crop_random_frames_pair(
    const ComplexSpectrogram& a, const ComplexSpectrogram& b, int frames, Rng& rng) {
  if (a.frames != b.frames || a.bins != b.bins)
    throw std::invalid_argument("crop pair: shape mismatch");
  const int slack = std::max(0, a.frames - frames);
  const int offset = slack > 0 ? rng.uniform_int(0, slack) : 0;
  return {crop_frames(a, frames, offset), crop_frames(b, frames, offset)};
}

}  // namespace storm
