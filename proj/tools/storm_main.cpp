// Command-line front-end: corpus synthesis, SDE verification, training,
// enhancement, and evaluation. Every command takes --seed and is
// reproducible under it with --jobs 1.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "storm/config.hpp"
#include "storm/dataset.hpp"
#include "storm/metrics.hpp"
#include "storm/pipeline.hpp"
#include "storm/train.hpp"
#include "storm/wav.hpp"

namespace fs = std::filesystem;
using namespace storm;

namespace {

std::string default_data_root() {
  const char* env = std::getenv("STORM_DATA_ROOT");
  return env ? env : "";
}

std::string resolve_under_root(const std::string& path, const std::string& what) {
  if (!path.empty()) return path;
  const std::string root = default_data_root();
  if (root.empty())
    throw DataError("no " + what + " given and STORM_DATA_ROOT is not set");
  return (fs::path(root) / what).string();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// ---------------------------------------------------------------------------
// synthesize
// ---------------------------------------------------------------------------

CorpusConfig corpus_config_from(KeyValueConfig& kv) {
  CorpusConfig cfg;
  cfg.count = kv.get_int("count", cfg.count);
  cfg.duration = kv.get_double("duration", cfg.duration);
  cfg.sample_rate = kv.get_double("sample_rate", cfg.sample_rate);
  cfg.wind.gusts_min = kv.get_int("gusts_min", cfg.wind.gusts_min);
  cfg.wind.gusts_max = kv.get_int("gusts_max", cfg.wind.gusts_max);
  cfg.wind.baseline_min = kv.get_double("baseline_min", cfg.wind.baseline_min);
  cfg.wind.baseline_max = kv.get_double("baseline_max", cfg.wind.baseline_max);
  auto& c = cfg.corruption;
  c.snr_min = kv.get_double("snr_min", c.snr_min);
  c.snr_max = kv.get_double("snr_max", c.snr_max);
  c.ratio_min = kv.get_double("ratio_min", c.ratio_min);
  c.ratio_max = kv.get_double("ratio_max", c.ratio_max);
  c.attack_min_ms = kv.get_double("attack_min_ms", c.attack_min_ms);
  c.attack_max_ms = kv.get_double("attack_max_ms", c.attack_max_ms);
  c.release_min_ms = kv.get_double("release_min_ms", c.release_min_ms);
  c.release_max_ms = kv.get_double("release_max_ms", c.release_max_ms);
  c.sidechain_gain_min = kv.get_double("sidechain_gain_min", c.sidechain_gain_min);
  c.sidechain_gain_max = kv.get_double("sidechain_gain_max", c.sidechain_gain_max);
  c.threshold_min_db = kv.get_double("threshold_min_db", c.threshold_min_db);
  c.threshold_max_db = kv.get_double("threshold_max_db", c.threshold_max_db);
  c.clip_probability = kv.get_double("clip_probability", c.clip_probability);
  c.eta_min = kv.get_double("eta_min", c.eta_min);
  c.eta_max = kv.get_double("eta_max", c.eta_max);
  cfg.recorded_noise_dir = kv.get_string("recorded_noise_dir", cfg.recorded_noise_dir);
  return cfg;
}

int cmd_synthesize(const std::string& config_path, std::string out_dir, std::uint64_t seed) {
  out_dir = resolve_under_root(out_dir, "corpus");
  KeyValueConfig kv =
      config_path.empty() ? KeyValueConfig() : KeyValueConfig::load(config_path);
  const CorpusConfig cfg = corpus_config_from(kv);
  kv.check_all_consumed();
  synthesize_corpus(cfg, out_dir, seed);
  std::printf("synthesized %d clips into %s\n", cfg.count, out_dir.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// verify-sde
// ---------------------------------------------------------------------------

struct MomentCheck {
  std::string name;
  double reference = 0.0;
  double measured = 0.0;
  double rel_err = 0.0;
  double tol = 0.0;
  bool pass() const { return rel_err <= tol; }
};

int cmd_verify_sde(const std::string& out_path, std::uint64_t seed, int trajectories,
                   int steps, double tol_mean, double tol_std, double tol_ode) {
  const OuveParams p;
  std::vector<MomentCheck> checks;

  // Forward Euler-Maruyama vs the closed-form perturbation kernel at
  // several diffusion times. One complex bin per trajectory.
  const cplx x0_val(1.0, 0.0);
  const cplx y_val(-0.5, 0.5);
  const std::vector<cplx> x0(static_cast<std::size_t>(trajectories), x0_val);
  const std::vector<cplx> y(static_cast<std::size_t>(trajectories), y_val);

  Rng rng(seed);
  const std::vector<double> taus{0.25, 0.5, 1.0};
  std::vector<std::vector<cplx>> snapshots(taus.size());
  forward_simulate(x0, y, p, steps, rng,
                   [&](int k, double tau, const std::vector<cplx>& x) {
                     for (std::size_t t = 0; t < taus.size(); ++t) {
                       const int want = static_cast<int>(std::llround(taus[t] / p.t_max * steps));
                       if (k == want) snapshots[t] = x;
                     }
                     (void)tau;
                   });

  for (std::size_t t = 0; t < taus.size(); ++t) {
    const double tau = taus[t];
    const std::vector<cplx> mean_ref = kernel_mean({x0_val}, {y_val}, tau, p);
    const double std_ref = kernel_std(tau, p);

    cplx mean_mc(0.0, 0.0);
    for (const cplx& c : snapshots[t]) mean_mc += c;
    mean_mc /= static_cast<double>(snapshots[t].size());
    double var_mc = 0.0;
    for (const cplx& c : snapshots[t]) var_mc += std::norm(c - mean_mc);
    var_mc /= static_cast<double>(snapshots[t].size());

    MomentCheck m;
    m.name = "forward_mean tau=" + std::to_string(tau);
    m.reference = std::abs(mean_ref[0]);
    m.measured = std::abs(mean_mc);
    m.rel_err = std::abs(mean_mc - mean_ref[0]) / std::abs(mean_ref[0]);
    m.tol = tol_mean;
    checks.push_back(m);

    MomentCheck s;
    s.name = "forward_std tau=" + std::to_string(tau);
    s.reference = std_ref;
    s.measured = std::sqrt(var_mc);
    s.rel_err = std::abs(s.measured - std_ref) / std_ref;
    s.tol = tol_std;
    checks.push_back(s);
  }

  // Variance ODE: d(sigma^2)/dtau = g^2 - 2*gamma*sigma^2, central differences.
  {
    double worst = 0.0;
    const double h = 1e-5;
    for (int i = 1; i <= 50; ++i) {
      const double tau = p.t_max * i / 51.0;
      const double s_plus = kernel_std(tau + h, p), s_minus = kernel_std(tau - h, p);
      const double lhs = (s_plus * s_plus - s_minus * s_minus) / (2.0 * h);
      const double g = diffusion_coeff(tau, p);
      const double s = kernel_std(tau, p);
      const double rhs = g * g - 2.0 * p.gamma * s * s;
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    MomentCheck m;
    m.name = "variance_ode max_residual";
    m.reference = 0.0;
    m.measured = worst;
    m.rel_err = worst;
    m.tol = tol_ode;
    checks.push_back(m);
  }

  // Reverse sampler against the analytic Gaussian score.
  {
    const cplx m0(0.8, -0.3);
    const double s0 = 0.3;
    const AnalyticGaussianScore oracle(m0, s0, p, y_val);
    const int n_bins = trajectories;

    std::vector<cplx> x_t(static_cast<std::size_t>(n_bins));
    const double std_t = std::sqrt(oracle.marginal_var(p.t_max));
    const cplx mean_t = oracle.marginal_mean(p.t_max);
    for (cplx& c : x_t) c = mean_t + std_t * rng.normal_complex();

    SamplerConfig cfg;
    cfg.n_steps = 200;
    const ScoreFn fn = [&](const std::vector<cplx>& x, double tau, double sigma) {
      return oracle.evaluate(x, 1, n_bins, {}, tau, sigma);
    };
    const std::vector<cplx> x_end =
        reverse_sample(x_t, std::vector<cplx>(static_cast<std::size_t>(n_bins), y_val), fn, p,
                       cfg, rng);

    cplx mean_mc(0.0, 0.0);
    for (const cplx& c : x_end) mean_mc += c;
    mean_mc /= static_cast<double>(x_end.size());
    double var_mc = 0.0;
    for (const cplx& c : x_end) var_mc += std::norm(c - mean_mc);
    var_mc /= static_cast<double>(x_end.size());

    MomentCheck m;
    m.name = "reverse_mean tau=0";
    m.reference = std::abs(m0);
    m.measured = std::abs(mean_mc);
    m.rel_err = std::abs(mean_mc - m0) / std::abs(m0);
    m.tol = 2.0 * tol_mean;
    checks.push_back(m);

    MomentCheck s;
    s.name = "reverse_std tau=0";
    s.reference = s0;
    s.measured = std::sqrt(var_mc);
    s.rel_err = std::abs(s.measured - s0) / s0;
    s.tol = 2.5 * tol_std;
    checks.push_back(s);
  }

  std::string report;
  bool all_pass = true;
  for (const MomentCheck& m : checks) {
    report += m.name + " reference=" + fmt(m.reference) + " measured=" + fmt(m.measured) +
              " rel_err=" + fmt(m.rel_err) + " tol=" + fmt(m.tol) +
              (m.pass() ? " PASS" : " FAIL") + "\n";
    all_pass = all_pass && m.pass();
  }
  report += all_pass ? "verify-sde: ALL CHECKS PASSED\n" : "verify-sde: FAILURES PRESENT\n";

  if (!out_path.empty()) {
    std::ofstream os(out_path, std::ios::trunc);
    if (!os) throw DataError("verify-sde: cannot write " + out_path);
    os << report;
  }
  std::fputs(report.c_str(), stdout);
  if (!all_pass) throw NumericError("verify-sde: moment checks failed");
  return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainCliSettings {
  TrainConfig train;
  OuveParams ouve;
  FrontEnd fe;
  int hidden = 12;
  int layers = 4;
  int kernel = 5;
  int emb_dim = 16;
  std::string mode = "storm";  // storm = predictor + score, generative = score only
};

TrainCliSettings train_settings_from(KeyValueConfig& kv) {
  TrainCliSettings s;
  s.mode = kv.get_string("mode", s.mode);
  if (s.mode != "storm" && s.mode != "generative")
    throw DataError("train: mode must be storm or generative");
  s.train.learning_rate = kv.get_double("learning_rate", s.train.learning_rate);
  s.train.batch = kv.get_int("batch", s.train.batch);
  s.train.ema_decay = kv.get_double("ema_decay", s.train.ema_decay);
  s.train.patience = kv.get_int("patience", s.train.patience);
  s.train.alpha = kv.get_double("alpha", s.train.alpha);
  s.train.max_epochs = kv.get_int("max_epochs", s.train.max_epochs);
  s.train.pretrain_max_epochs = kv.get_int("pretrain_max_epochs", s.train.pretrain_max_epochs);
  s.train.crop_frames = kv.get_int("crop_frames", s.train.crop_frames);
  s.train.val_fraction = kv.get_double("val_fraction", s.train.val_fraction);
  s.ouve.gamma = kv.get_double("gamma", s.ouve.gamma);
  s.ouve.sigma_min = kv.get_double("sigma_min", s.ouve.sigma_min);
  s.ouve.sigma_max = kv.get_double("sigma_max", s.ouve.sigma_max);
  s.ouve.t_max = kv.get_double("t_max", s.ouve.t_max);
  s.ouve.t_eps = kv.get_double("t_eps", s.ouve.t_eps);
  s.fe.stft.window_len = kv.get_int("window_len", s.fe.stft.window_len);
  s.fe.stft.hop = kv.get_int("hop", s.fe.stft.hop);
  s.fe.warp_exponent = kv.get_double("warp_exponent", s.fe.warp_exponent);
  s.fe.warp_scale = kv.get_double("warp_scale", s.fe.warp_scale);
  s.hidden = kv.get_int("hidden_channels", s.hidden);
  s.layers = kv.get_int("layers", s.layers);
  s.kernel = kv.get_int("kernel", s.kernel);
  s.emb_dim = kv.get_int("emb_dim", s.emb_dim);
  return s;
}

int cmd_train(const std::string& config_path, std::string data_dir,
              const std::string& checkpoint_out, const std::string& history_out,
              const std::string& resume_path, std::uint64_t seed) {
  data_dir = resolve_under_root(data_dir, "corpus");
  KeyValueConfig kv =
      config_path.empty() ? KeyValueConfig() : KeyValueConfig::load(config_path);
  TrainCliSettings s = train_settings_from(kv);
  kv.check_all_consumed();

  const auto wave_pairs = load_corpus_pairs(data_dir);
  std::vector<SpecPair> dataset;
  dataset.reserve(wave_pairs.size());
  for (const auto& [clean, noisy] : wave_pairs)
    dataset.push_back(make_training_pair(clean, noisy, s.fe));

  const bool joint = s.mode == "storm";
  TinyScoreNet score(joint ? 2 : 1, s.hidden, s.layers, s.kernel, s.emb_dim);
  PredictorNet predictor(s.hidden, s.layers, s.kernel);
  Rng init_rng(derive_seed(seed, 0x1217));
  score.init(init_rng);
  predictor.init(init_rng);

  if (!resume_path.empty()) {
    // Warm start from a saved checkpoint; architectures must agree.
    const Checkpoint prev = load_checkpoint(resume_path);
    if (prev.score_descriptor != score.stack().config().descriptor())
      throw DataError("train: resume checkpoint has a different score architecture");
    score.set_params(prev.score_params);
    if (joint) {
      if (!prev.has_predictor)
        throw DataError("train: resume checkpoint has no predictor");
      if (prev.predictor_descriptor != predictor.stack().config().descriptor())
        throw DataError("train: resume checkpoint has a different predictor architecture");
      predictor.set_params(prev.predictor_params);
    }
  }

  const TrainResult result =
      train(score, joint ? &predictor : nullptr, dataset, s.train, s.ouve, seed);

  Checkpoint ckpt;
  ckpt.ouve = s.ouve;
  ckpt.stft = s.fe.stft;
  ckpt.warp_exponent = s.fe.warp_exponent;
  ckpt.warp_scale = s.fe.warp_scale;
  ckpt.score_descriptor = score.stack().config().descriptor();
  ckpt.score_params = result.score_params;
  ckpt.score_ema = result.score_ema;
  ckpt.has_predictor = joint;
  if (joint) {
    ckpt.predictor_descriptor = predictor.stack().config().descriptor();
    ckpt.predictor_params = result.predictor_params;
    ckpt.predictor_ema = result.predictor_ema;
  }
  ckpt.rng_state = Rng(seed).serialize();
  save_checkpoint(checkpoint_out, ckpt);

  std::string history;
  for (const EpochRecord& r : result.history) {
    history += "phase=" + std::to_string(r.phase) + " epoch=" + std::to_string(r.epoch) +
               " train_loss=" + fmt(r.train_loss) + " val_loss=" + fmt(r.val_loss) + "\n";
  }
  history += std::string("diverged=") + (result.diverged ? "1" : "0") + "\n";
  if (!history_out.empty()) {
    std::ofstream os(history_out, std::ios::trunc);
    if (!os) throw DataError("train: cannot write " + history_out);
    os << history;
  }
  std::printf("trained on %zu pairs, %zu epochs logged, checkpoint: %s\n", dataset.size(),
              result.history.size(), checkpoint_out.c_str());
  if (result.diverged) throw NumericError("train: loss diverged; last good parameters kept");
  return 0;
}

// ---------------------------------------------------------------------------
// enhance
// ---------------------------------------------------------------------------

int cmd_enhance(const std::string& mode, const std::string& checkpoint_path, std::string in_dir,
                std::string out_dir, std::uint64_t seed, int steps, int corrector,
                double corrector_snr, bool use_ema, int jobs) {
  in_dir = resolve_under_root(in_dir, "noisy");
  out_dir = resolve_under_root(out_dir, "enhanced");

  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  FrontEnd fe;
  fe.stft = ckpt.stft;
  fe.warp_exponent = ckpt.warp_exponent;
  fe.warp_scale = ckpt.warp_scale;

  TinyScoreNet score(ConvStackConfig(parse_descriptor(ckpt.score_descriptor)));
  score.set_params(use_ema ? ckpt.score_ema : ckpt.score_params);
  PredictorNet predictor(ConvStackConfig(parse_descriptor(
      ckpt.has_predictor ? ckpt.predictor_descriptor
                         : ConvStackConfig{2, 12, 2, 4, 5, false, 16}.descriptor())));
  if (ckpt.has_predictor)
    predictor.set_params(use_ema ? ckpt.predictor_ema : ckpt.predictor_params);
  if ((mode == "storm" || mode == "predictive") && !ckpt.has_predictor)
    throw DataError("enhance: checkpoint has no predictor for mode " + mode);
  const int score_in = score.stack().config().in_channels;
  if (mode == "storm" && score_in != 6)
    throw DataError("enhance: storm mode needs a score model conditioned on [y, D(y)]");
  if (mode == "generative" && score_in != 4)
    throw DataError("enhance: generative mode needs a score model conditioned on [y]");

  // The process parameters ride with the checkpoint: the score model is
  // only valid for the process it was trained on. The generative baseline
  // is trained with gamma=2.5 and sigma_max=0.75 via the train config.
  const OuveParams p = ckpt.ouve;
  SamplerConfig cfg;
  cfg.n_steps = steps;
  cfg.corrector_steps = corrector;
  cfg.corrector_snr = corrector_snr;

  fs::create_directories(out_dir);
  const std::vector<std::string> files = list_wav_files(in_dir);
  if (files.empty()) throw DataError("enhance: no .wav files in " + in_dir);

  const auto worker = [&](std::size_t i) {
    const Waveform noisy = read_wav(files[i]);
    Rng rng(derive_seed(seed, i));
    Waveform out;
    if (mode == "storm") {
      out = enhance_storm(noisy, predictor, score, p, cfg, fe, rng);
    } else if (mode == "generative") {
      out = enhance_generative(noisy, score, p, cfg, fe, rng);
    } else if (mode == "predictive") {
      out = enhance_predictive(noisy, predictor, fe);
    } else {
      throw DataError("enhance: unknown mode " + mode);
    }
    const std::string name = fs::path(files[i]).filename().string();
    write_wav((fs::path(out_dir) / name).string(), out, WavFormat::float32);
  };

  if (jobs <= 1) {
    for (std::size_t i = 0; i < files.size(); ++i) worker(i);
  } else {
    // Per-file seeds are derived from the index, so the outputs do not
    // depend on scheduling.
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (int j = 0; j < jobs; ++j)
      pool.emplace_back([&]() {
        for (std::size_t i = next.fetch_add(1); i < files.size(); i = next.fetch_add(1))
          worker(i);
      });
    for (auto& t : pool) t.join();
  }
  std::printf("enhanced %zu files (%s) into %s\n", files.size(), mode.c_str(), out_dir.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

int cmd_evaluate(std::string ref_dir, std::string est_dir, const std::string& out_path) {
  ref_dir = resolve_under_root(ref_dir, "clean");
  est_dir = resolve_under_root(est_dir, "enhanced");

  const std::vector<std::string> ref_files = list_wav_files(ref_dir);
  if (ref_files.empty()) throw DataError("evaluate: no .wav files in " + ref_dir);

  std::string report;
  std::vector<double> sisdr_all, snr_all, lsd_all;
  for (const std::string& rf : ref_files) {
    const std::string name = fs::path(rf).filename().string();
    const std::string ef = (fs::path(est_dir) / name).string();
    if (!fs::exists(ef)) throw DataError("evaluate: missing estimate for " + name);
    const Waveform ref = read_wav(rf);
    const Waveform est = read_wav(ef);
    const double v_sisdr = si_sdr(ref, est);
    const double v_snr = snr(ref, est);
    const double v_lsd = log_spectral_distance(ref, est);
    sisdr_all.push_back(v_sisdr);
    snr_all.push_back(v_snr);
    lsd_all.push_back(v_lsd);
    report += "file=" + name + " si_sdr=" + fmt(v_sisdr) + " snr=" + fmt(v_snr) +
              " lsd=" + fmt(v_lsd) + "\n";
  }

  const auto mean_std = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());
    return std::pair<double, double>(mean, std::sqrt(var));
  };
  const auto [m_sisdr, s_sisdr] = mean_std(sisdr_all);
  const auto [m_snr, s_snr] = mean_std(snr_all);
  const auto [m_lsd, s_lsd] = mean_std(lsd_all);
  report += "summary si_sdr=" + fmt(m_sisdr) + "+-" + fmt(s_sisdr) + " snr=" + fmt(m_snr) +
            "+-" + fmt(s_snr) + " lsd=" + fmt(m_lsd) + "+-" + fmt(s_lsd) + "\n";

  if (!out_path.empty()) {
    std::ofstream os(out_path, std::ios::trunc);
    if (!os) throw DataError("evaluate: cannot write " + out_path);
    os << report;
  }
  std::fputs(report.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"StoRM wind-noise reduction toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  int jobs = 1;
  app.add_option("--seed", seed, "Global random seed")->capture_default_str();
  app.add_option("--jobs", jobs, "Worker threads (1 guarantees determinism)")
      ->capture_default_str();

  // synthesize
  auto* synth = app.add_subcommand("synthesize", "Generate a paired clean/noisy corpus");
  std::string synth_config, synth_out;
  synth->add_option("--config", synth_config, "Key=value config file");
  synth->add_option("--out", synth_out, "Output corpus directory");

  // verify-sde
  auto* verify = app.add_subcommand("verify-sde", "Closed-form vs Monte-Carlo moment checks");
  std::string verify_out;
  int verify_traj = 10000, verify_steps = 1000;
  double tol_mean = 0.01, tol_std = 0.02, tol_ode = 1e-6;
  verify->add_option("--out", verify_out, "Report file");
  verify->add_option("--trajectories", verify_traj, "Monte-Carlo trajectories")
      ->capture_default_str();
  verify->add_option("--steps", verify_steps, "Euler-Maruyama steps")->capture_default_str();
  verify->add_option("--tol-mean", tol_mean, "Mean tolerance")->capture_default_str();
  verify->add_option("--tol-std", tol_std, "Std tolerance")->capture_default_str();
  verify->add_option("--tol-ode", tol_ode, "Variance-ODE tolerance")->capture_default_str();

  // train
  auto* train_cmd = app.add_subcommand("train", "Two-phase predictor + score training");
  std::string train_config, train_data, train_ckpt = "storm.ckpt", train_history, train_resume;
  train_cmd->add_option("--config", train_config, "Key=value config file");
  train_cmd->add_option("--data", train_data, "Corpus directory (clean/ + noisy/)");
  train_cmd->add_option("--checkpoint-out", train_ckpt, "Checkpoint path")
      ->capture_default_str();
  train_cmd->add_option("--history-out", train_history, "Training history file");
  train_cmd->add_option("--resume", train_resume, "Warm-start from an existing checkpoint");

  // enhance
  auto* enhance = app.add_subcommand("enhance", "Enhance a directory of noisy wavs");
  std::string enh_mode = "storm", enh_ckpt, enh_in, enh_out;
  int enh_steps = -1, enh_corrector = -1;
  double enh_corrector_snr = 0.5;
  bool enh_raw = false;
  enhance->add_option("--mode", enh_mode, "storm | generative | predictive")
      ->check(CLI::IsMember({"storm", "generative", "predictive"}))
      ->capture_default_str();
  enhance->add_option("--checkpoint", enh_ckpt, "Checkpoint path")->required();
  enhance->add_option("--in", enh_in, "Input directory");
  enhance->add_option("--out", enh_out, "Output directory");
  enhance->add_option("--steps", enh_steps, "Reverse steps (default 20 storm / 30 generative)");
  enhance->add_option("--corrector", enh_corrector,
                      "Langevin corrector steps per grid point (default 0 storm / 1 generative)");
  enhance->add_option("--corrector-snr", enh_corrector_snr, "Corrector step-size parameter r")
      ->capture_default_str();
  enhance->add_flag("--raw-weights", enh_raw, "Use raw instead of EMA weights");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Reference-based metrics over two directories");
  std::string eval_ref, eval_est, eval_out;
  evaluate->add_option("--ref", eval_ref, "Reference (clean) directory");
  evaluate->add_option("--est", eval_est, "Estimate directory");
  evaluate->add_option("--out", eval_out, "Report file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) return cmd_synthesize(synth_config, synth_out, seed);
    if (verify->parsed())
      return cmd_verify_sde(verify_out, seed, verify_traj, verify_steps, tol_mean, tol_std,
                            tol_ode);
    if (train_cmd->parsed())
      return cmd_train(train_config, train_data, train_ckpt, train_history, train_resume, seed);
    if (enhance->parsed()) {
      if (enh_steps < 0) enh_steps = enh_mode == "generative" ? 30 : 20;
      if (enh_corrector < 0) enh_corrector = enh_mode == "generative" ? 1 : 0;
      return cmd_enhance(enh_mode, enh_ckpt, enh_in, enh_out, seed, enh_steps, enh_corrector,
                         enh_corrector_snr, !enh_raw, jobs);
    }
    if (evaluate->parsed()) return cmd_evaluate(eval_ref, eval_est, eval_out);
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
