#pragma once

#include <vector>

#include "storm/common.hpp"
#include "storm/signal.hpp"

namespace storm {

struct Gust {
  double onset = 0.0;     // s
  double duration = 0.0;  // s
  double peak = 0.0;      // normalized airflow speed
  double attack_frac = 0.25;
  double decay_frac = 0.25;
};

/// Randomized airflow profile: a baseline speed plus 1..10 gusts with
/// raised-cosine ramps. Speeds are normalized to [0, 1].
struct AirflowProfile {
  double baseline_speed = 0.1;
  std::vector<Gust> gusts;
  double total_duration = 0.0;  // s

  /// Instantaneous airflow speed at time t (max of baseline and gust ramps).
  double speed_at(double t) const;
};

void validate(const AirflowProfile& profile);

struct WindSamplingRanges {
  int gusts_min = 1;
  int gusts_max = 10;
  double baseline_min = 0.05;
  double baseline_max = 0.4;
};

AirflowProfile sample_airflow_profile(double duration, Rng& rng,
                                      const WindSamplingRanges& ranges = {});

/// Wind-like noise for the given profile: white noise shaped by a
/// speed-dependent low-pass (two cascaded one-pole sections, cutoff
/// 100..300 Hz), amplitude-modulated by the airflow speed with a slow
/// turbulence gain. Output is bounded in [-1, 1].
Waveform synthesize_wind_noise(const AirflowProfile& profile, double sample_rate, Rng& rng);

}  // namespace storm
