#include "storm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "storm/wav.hpp"

namespace fs = std::filesystem;

namespace storm {

namespace {

// Two-pole resonator at the given center frequency / bandwidth.
struct Resonator {
  double b0 = 1.0, a1 = 0.0, a2 = 0.0;
  double z1 = 0.0, z2 = 0.0;

  Resonator(double freq, double bandwidth, double fs) {
    const double r = std::exp(-M_PI * bandwidth / fs);
    a1 = -2.0 * r * std::cos(2.0 * M_PI * freq / fs);
    a2 = r * r;
    b0 = 1.0 - r;  // rough unity-ish gain at resonance
  }

  double process(double x) {
    const double y = b0 * x - a1 * z1 - a2 * z2;
    z2 = z1;
    z1 = y;
    return y;
  }
};

}  // namespace

Waveform synthesize_toy_speech(double duration, double sample_rate, Rng& rng) {
  if (duration <= 0.0 || sample_rate <= 0.0)
    throw std::invalid_argument("toy speech: duration and sample rate must be > 0");
  const auto n = static_cast<std::size_t>(std::llround(duration * sample_rate));

  const double f0_base = rng.uniform(90.0, 220.0);
  const double vibrato_rate = rng.uniform(4.0, 7.0);
  const double vibrato_depth = rng.uniform(0.005, 0.03);
  const double drift = rng.uniform(-0.15, 0.15);  // relative pitch drift over the clip

  Resonator f1(rng.uniform(300.0, 900.0), rng.uniform(60.0, 120.0), sample_rate);
  Resonator f2(rng.uniform(900.0, 2500.0), rng.uniform(80.0, 160.0), sample_rate);
  Resonator f3(rng.uniform(2500.0, 3500.0), rng.uniform(120.0, 220.0), sample_rate);

  // Syllabic envelope: voiced bursts at 2..5 Hz with raised-cosine edges.
  const double syllable_rate = rng.uniform(2.0, 5.0);
  const double voiced_fraction = rng.uniform(0.55, 0.85);
  const double syllable_phase = rng.uniform(0.0, 1.0);

  Waveform out;
  out.sample_rate = sample_rate;
  out.samples.resize(n, 0.0);

  double phase = rng.uniform(0.0, 2.0 * M_PI);
  const int harmonics = 24;

  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double rel = t / duration;
    const double f0 = f0_base * (1.0 + drift * rel) *
                      (1.0 + vibrato_depth * std::sin(2.0 * M_PI * vibrato_rate * t));
    phase += 2.0 * M_PI * f0 / sample_rate;

    // Harmonic source with 1/k rolloff, capped below 4 kHz.
    double src = 0.0;
    for (int k = 1; k <= harmonics; ++k) {
      if (k * f0 > 4000.0) break;
      src += std::sin(k * phase) / static_cast<double>(k);
    }
    src += 0.02 * rng.normal();  // breath noise

    const double shaped = f1.process(src) + 0.7 * f2.process(src) + 0.4 * f3.process(src);

    const double cycle = std::fmod(t * syllable_rate + syllable_phase, 1.0);
    double env = 0.0;
    if (cycle < voiced_fraction) {
      const double x = cycle / voiced_fraction;
      env = 0.5 * (1.0 - std::cos(2.0 * M_PI * x));
    }
    out.samples[i] = shaped * env;
  }

  double peak = 0.0;
  for (double s : out.samples) peak = std::max(peak, std::abs(s));
  if (peak > 0.0) {
    const double g = 0.7 / peak;
    for (double& s : out.samples) s *= g;
  }
  return out;
}

std::vector<std::string> list_wav_files(const std::string& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav")
      files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

namespace {

Waveform recorded_noise_clip(const std::vector<std::string>& files, std::size_t want,
                             double sample_rate, Rng& rng) {
  const std::string& path = files[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<int>(files.size()) - 1))];
  Waveform w = read_wav(path);
  if (w.sample_rate != sample_rate)
    throw DataError("recorded noise: " + path + " is not sampled at " +
                    std::to_string(static_cast<int>(sample_rate)) + " Hz (resampling rejected)");
  if (w.samples.empty()) throw DataError("recorded noise: empty file " + path);

  // Tile short files, then take a random crop.
  std::vector<double> tiled = w.samples;
  while (tiled.size() < want) tiled.insert(tiled.end(), w.samples.begin(), w.samples.end());
  const std::size_t slack = tiled.size() - want;
  const std::size_t off =
      slack > 0 ? static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(slack))) : 0;
  w.samples.assign(tiled.begin() + static_cast<std::ptrdiff_t>(off),
                   tiled.begin() + static_cast<std::ptrdiff_t>(off + want));
  return w;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void synthesize_corpus(const CorpusConfig& cfg, const std::string& out_dir, std::uint64_t seed) {
  if (cfg.count < 1) throw std::invalid_argument("corpus: count must be >= 1");
  if (cfg.duration <= 0.0) throw std::invalid_argument("corpus: duration must be > 0");

  fs::create_directories(fs::path(out_dir) / "clean");
  fs::create_directories(fs::path(out_dir) / "noisy");

  std::vector<std::string> noise_files;
  if (!cfg.recorded_noise_dir.empty()) {
    noise_files = list_wav_files(cfg.recorded_noise_dir);
    if (noise_files.empty())
      throw DataError("corpus: no .wav files in " + cfg.recorded_noise_dir);
  }

  std::ofstream manifest(fs::path(out_dir) / "manifest.txt", std::ios::trunc);
  if (!manifest) throw DataError("corpus: cannot write manifest in " + out_dir);

  const auto clip_samples =
      static_cast<std::size_t>(std::llround(cfg.duration * cfg.sample_rate));

  for (int i = 0; i < cfg.count; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));

    const Waveform speech = synthesize_toy_speech(cfg.duration, cfg.sample_rate, rng);
    Waveform noise;
    if (noise_files.empty()) {
      const AirflowProfile profile = sample_airflow_profile(cfg.duration, rng, cfg.wind);
      noise = synthesize_wind_noise(profile, cfg.sample_rate, rng);
    } else {
      noise = recorded_noise_clip(noise_files, clip_samples, cfg.sample_rate, rng);
    }

    const CorruptionParams params = sample_corruption_params(rng, cfg.corruption);
    auto [noisy, clean] = corrupt(speech, noise, params);

    char name[32];
    std::snprintf(name, sizeof(name), "%04d.wav", i);
    write_wav((fs::path(out_dir) / "clean" / name).string(), clean, WavFormat::float32);
    write_wav((fs::path(out_dir) / "noisy" / name).string(), noisy, WavFormat::float32);

    manifest << "file=" << name << " snr=" << format_double(params.snr_db)
             << " threshold=" << format_double(params.compressor.threshold_db)
             << " ratio=" << format_double(params.compressor.ratio)
             << " attack=" << format_double(params.compressor.attack_ms)
             << " release=" << format_double(params.compressor.release_ms)
             << " sidechain_gain=" << format_double(params.compressor.sidechain_gain)
             << " clip=" << (params.clip ? 1 : 0) << " eta=" << format_double(params.eta)
             << "\n";
  }
  if (!manifest) throw DataError("corpus: short write to manifest");
}

std::vector<std::pair<Waveform, Waveform>> load_corpus_pairs(const std::string& dir) {
  const std::string clean_dir = (fs::path(dir) / "clean").string();
  const std::string noisy_dir = (fs::path(dir) / "noisy").string();
  const std::vector<std::string> clean_files = list_wav_files(clean_dir);
  if (clean_files.empty()) throw DataError("corpus: no clean files in " + clean_dir);

  std::vector<std::pair<Waveform, Waveform>> pairs;
  pairs.reserve(clean_files.size());
  for (const std::string& cf : clean_files) {
    const std::string name = fs::path(cf).filename().string();
    const std::string nf = (fs::path(noisy_dir) / name).string();
    if (!fs::exists(nf)) throw DataError("corpus: missing noisy file for " + name);
    pairs.emplace_back(read_wav(cf), read_wav(nf));
  }
  return pairs;
}

SpecPair make_training_pair(const Waveform& clean, const Waveform& noisy, const FrontEnd& fe) {
  auto [c, n, gain] = normalize_by_noisy_max(clean, noisy);
  (void)gain;
  SpecPair pair;
  pair.clean = warp(stft(c, fe.stft), fe.warp_exponent, fe.warp_scale);
  pair.noisy = warp(stft(n, fe.stft), fe.warp_exponent, fe.warp_scale);
  return pair;
}

}  // namespace storm
