#pragma once

#include "storm/signal.hpp"

namespace storm {

/// Scale-invariant signal-to-distortion ratio in dB: the estimate is
/// projected onto the reference (optimal scaling), then the
/// signal-to-error power ratio is taken. Capped at +100 dB.
double si_sdr(const Waveform& reference, const Waveform& estimate);

/// Plain (non-scale-invariant) SNR in dB, capped at +100 dB.
double snr(const Waveform& reference, const Waveform& estimate);

/// RMS log-magnitude spectral distance in dB; magnitudes floored at -80 dB.
double log_spectral_distance(const Waveform& reference, const Waveform& estimate,
                             const StftConfig& cfg = {});

}  // namespace storm
