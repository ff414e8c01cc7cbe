#include "storm/wind.hpp"

#include <algorithm>
#include <cmath>

namespace storm {

namespace {

// Raised-cosine ramp from 0 at x=0 to 1 at x=1.
double raised_cosine(double x) { return 0.5 * (1.0 - std::cos(M_PI * std::clamp(x, 0.0, 1.0))); }

double gust_envelope(const Gust& g, double t) {
  const double rel = t - g.onset;
  if (rel < 0.0 || rel > g.duration) return 0.0;
  const double attack = g.attack_frac * g.duration;
  const double decay = g.decay_frac * g.duration;
  if (rel < attack) return raised_cosine(rel / attack);
  if (rel > g.duration - decay) return raised_cosine((g.duration - rel) / decay);
  return 1.0;
}

}  // namespace

double AirflowProfile::speed_at(double t) const {
  double v = baseline_speed;
  for (const Gust& g : gusts) {
    const double env = gust_envelope(g, t);
    v = std::max(v, baseline_speed + (g.peak - baseline_speed) * env);
  }
  return v;
}

void validate(const AirflowProfile& profile) {
  if (profile.total_duration <= 0.0)
    throw std::invalid_argument("airflow profile: duration must be > 0");
  if (profile.baseline_speed < 0.0)
    throw std::invalid_argument("airflow profile: baseline speed must be >= 0");
  for (const Gust& g : profile.gusts) {
    if (g.onset < 0.0 || g.duration <= 0.0 || g.onset + g.duration > profile.total_duration + 1e-9)
      throw std::invalid_argument("airflow profile: gust exceeds total duration");
    if (g.peak < profile.baseline_speed)
      throw std::invalid_argument("airflow profile: gust peak below baseline");
  }
}

AirflowProfile sample_airflow_profile(double duration, Rng& rng,
                                      const WindSamplingRanges& ranges) {
  if (duration <= 0.0) throw std::invalid_argument("airflow profile: duration must be > 0");

  AirflowProfile p;
  p.total_duration = duration;
  p.baseline_speed = rng.uniform(ranges.baseline_min, ranges.baseline_max);

  const int n_gusts = rng.uniform_int(ranges.gusts_min, ranges.gusts_max);
  p.gusts.reserve(static_cast<std::size_t>(n_gusts));
  for (int i = 0; i < n_gusts; ++i) {
    Gust g;
    g.duration = std::min(duration, rng.uniform(0.3, 1.5));
    g.onset = rng.uniform(0.0, duration - g.duration);
    g.peak = rng.uniform(p.baseline_speed, 1.0);
    g.attack_frac = rng.uniform(0.1, 0.5);
    g.decay_frac = rng.uniform(0.1, 0.5);
    p.gusts.push_back(g);
  }
  return p;
}

Waveform synthesize_wind_noise(const AirflowProfile& profile, double sample_rate, Rng& rng) {
  validate(profile);
  if (sample_rate <= 0.0) throw std::invalid_argument("wind synth: sample rate must be > 0");

  const auto n = static_cast<std::size_t>(std::llround(profile.total_duration * sample_rate));
  Waveform out;
  out.sample_rate = sample_rate;
  out.samples.resize(n, 0.0);

  // Slow turbulence gain: one-pole smoothed noise at ~2 Hz bandwidth,
  // normalized into [-1, 1] by its steady-state std.
  const double turb_alpha = std::exp(-2.0 * M_PI * 2.0 / sample_rate);
  const double turb_std = std::sqrt((1.0 - turb_alpha) / (1.0 + turb_alpha));
  double turb_state = 0.0;

  // Output level constant; keeps full-speed noise comfortably inside [-1, 1].
  const double level = 0.15;

  double lp1 = 0.0, lp2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double v = std::clamp(profile.speed_at(t), 0.0, 1.0);

    const double white = rng.normal();
    turb_state = turb_alpha * turb_state + (1.0 - turb_alpha) * rng.normal();
    const double turb = std::clamp(turb_state / (3.0 * turb_std), -1.0, 1.0);

    // Speed-dependent cutoff, 100..300 Hz; two cascaded one-pole sections.
    const double cutoff = 100.0 + 200.0 * v;
    const double a = std::exp(-2.0 * M_PI * cutoff / sample_rate);
    lp1 = a * lp1 + (1.0 - a) * white;
    lp2 = a * lp2 + (1.0 - a) * lp1;

    // Power grows steeply with airflow speed; the turbulence term scales
    // with v so the amplitude stays monotone in v for fixed noise draws.
    const double amp = level * std::pow(v, 1.5) * (1.0 + 0.2 * v * turb);
    out.samples[i] = amp * lp2 * 12.0;  // 12x undoes the low-pass variance loss
  }

  double peak = 0.0;
  for (double s : out.samples) peak = std::max(peak, std::abs(s));
  if (peak > 1.0) {
    const double g = 0.99 / peak;
    for (double& s : out.samples) s *= g;
  }
  return out;
}

}  // namespace storm
