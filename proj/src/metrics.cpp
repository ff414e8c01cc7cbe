#include "storm/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace storm {

namespace {

constexpr double kCapDb = 100.0;

void require_equal_length(const Waveform& a, const Waveform& b, const char* op) {
  if (a.samples.size() != b.samples.size())
    throw std::invalid_argument(std::string(op) + ": length mismatch");
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

double si_sdr(const Waveform& reference, const Waveform& estimate) {
  require_equal_length(reference, estimate, "si_sdr");
  const double ref_energy = dot(reference.samples, reference.samples);
  if (ref_energy <= 0.0) throw DataError("si_sdr: silent reference");

  const double scale = dot(estimate.samples, reference.samples) / ref_energy;
  const double target_energy = scale * scale * ref_energy;
  double err_energy = 0.0;
  for (std::size_t i = 0; i < reference.samples.size(); ++i) {
    const double e = estimate.samples[i] - scale * reference.samples[i];
    err_energy += e * e;
  }
  if (err_energy <= target_energy * 1e-10) return kCapDb;
  return std::min(kCapDb, 10.0 * std::log10(target_energy / err_energy));
}

double snr(const Waveform& reference, const Waveform& estimate) {
  require_equal_length(reference, estimate, "snr");
  const double ref_energy = dot(reference.samples, reference.samples);
  if (ref_energy <= 0.0) throw DataError("snr: silent reference");

  double err_energy = 0.0;
  for (std::size_t i = 0; i < reference.samples.size(); ++i) {
    const double e = estimate.samples[i] - reference.samples[i];
    err_energy += e * e;
  }
  if (err_energy <= ref_energy * 1e-10) return kCapDb;
  return std::min(kCapDb, 10.0 * std::log10(ref_energy / err_energy));
}

double log_spectral_distance(const Waveform& reference, const Waveform& estimate,
                             const StftConfig& cfg) {
  require_equal_length(reference, estimate, "log_spectral_distance");
  const ComplexSpectrogram r = stft(reference, cfg);
  const ComplexSpectrogram e = stft(estimate, cfg);

  const double floor_mag = 1e-4;  // -80 dB
  double acc = 0.0;
  for (std::size_t i = 0; i < r.data.size(); ++i) {
    const double mr = std::max(std::abs(r.data[i]), floor_mag);
    const double me = std::max(std::abs(e.data[i]), floor_mag);
    const double d = 20.0 * (std::log10(mr) - std::log10(me));
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(r.data.size()));
}

}  // namespace storm
