// Acceptance suite: runs every top-level correctness gate at its stated
// tolerance and prints one PASS/FAIL line per criterion. Criteria 9 and 10
// drive the CLI binary (path given with --cli) end to end.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "storm/corruption.hpp"
#include "storm/dataset.hpp"
#include "storm/metrics.hpp"
#include "storm/pipeline.hpp"
#include "storm/train.hpp"
#include "storm/wav.hpp"
#include "storm/wind.hpp"

namespace fs = std::filesystem;
using namespace storm;
using Clock = std::chrono::steady_clock;

namespace {

std::string g_cli;

struct Result {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

int run_cli(const std::string& args) {
  const std::string cmd = g_cli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("acceptance: cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool dirs_equal(const fs::path& a, const fs::path& b, std::string& why) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a))
    if (e.is_regular_file()) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  for (const std::string& n : names) {
    if (!fs::exists(b / n)) {
      why = "missing " + n;
      return false;
    }
    if (slurp(a / n) != slurp(b / n)) {
      why = "differs: " + n;
      return false;
    }
  }
  return true;
}

std::string fmt(double v, int prec = 4) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

std::vector<cplx> random_complex(std::size_t n, Rng& rng) {
  std::vector<cplx> v(n);
  for (cplx& c : v) c = rng.normal_complex();
  return v;
}

// Perfect score for DSM draws: -(x - mu)/sigma^2 equals -z/sigma.
class KernelOracleScore final : public ScoreModel {
 public:
  KernelOracleScore(std::vector<cplx> x0, std::vector<cplx> anchor, const OuveParams& p)
      : x0_(std::move(x0)), anchor_(std::move(anchor)), p_(p) {}
  std::vector<cplx> evaluate(const std::vector<cplx>& x, int, int,
                             const std::vector<const std::vector<cplx>*>&, double tau,
                             double sigma) const override {
    const std::vector<cplx> mu = kernel_mean(x0_, anchor_, tau, p_);
    std::vector<cplx> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = -(x[i] - mu[i]) / (sigma * sigma);
    return out;
  }

 private:
  std::vector<cplx> x0_, anchor_;
  OuveParams p_;
};

class ZeroScore final : public ScoreModel {
 public:
  std::vector<cplx> evaluate(const std::vector<cplx>& x, int, int,
                             const std::vector<const std::vector<cplx>*>&, double,
                             double) const override {
    return std::vector<cplx>(x.size(), cplx(0.0, 0.0));
  }
};

// ---------------------------------------------------------------------------
// 1. Perturbation-kernel consistency.
// ---------------------------------------------------------------------------
Result criterion_1() {
  Result r{1, "perturbation-kernel consistency (forward EM vs closed form)"};
  const OuveParams p;
  const int trajectories = 10000, steps = 1000;
  const cplx x0_val(1.0, 0.0), y_val(-0.5, 0.5);
  const std::vector<cplx> x0(trajectories, x0_val), y(trajectories, y_val);

  Rng rng(8);
  const std::vector<double> taus{0.25, 0.5, 1.0};
  std::vector<std::vector<cplx>> snapshots(taus.size());
  forward_simulate(x0, y, p, steps, rng, [&](int k, double, const std::vector<cplx>& x) {
    for (std::size_t t = 0; t < taus.size(); ++t)
      if (k == static_cast<int>(std::llround(taus[t] / p.t_max * steps))) snapshots[t] = x;
  });

  double worst_mean = 0.0, worst_std = 0.0;
  for (std::size_t t = 0; t < taus.size(); ++t) {
    const cplx mean_ref = kernel_mean({x0_val}, {y_val}, taus[t], p)[0];
    const double std_ref = kernel_std(taus[t], p);
    cplx mean(0.0, 0.0);
    for (const cplx& c : snapshots[t]) mean += c;
    mean /= static_cast<double>(trajectories);
    double var = 0.0;
    for (const cplx& c : snapshots[t]) var += std::norm(c - mean);
    var /= static_cast<double>(trajectories);
    worst_mean = std::max(worst_mean, std::abs(mean - mean_ref) / std::abs(mean_ref));
    worst_std = std::max(worst_std, std::abs(std::sqrt(var) - std_ref) / std_ref);
  }
  r.pass = worst_mean < 0.01 && worst_std < 0.02;
  r.detail = "worst mean rel err " + fmt(worst_mean) + " (tol 0.01), worst std rel err " +
             fmt(worst_std) + " (tol 0.02), " + std::to_string(trajectories) +
             " trajectories x " + std::to_string(steps) + " steps";
  return r;
}

// ---------------------------------------------------------------------------
// 2. Reverse-sampler correctness against the analytic Gaussian score.
// ---------------------------------------------------------------------------
Result criterion_2() {
  Result r{2, "reverse-sampler terminal moments match the toy clean distribution"};
  const OuveParams p;
  const cplx m0(0.8, -0.3), y_val(-0.5, 0.5);
  const double s0 = 0.3;
  const AnalyticGaussianScore oracle(m0, s0, p, y_val);

  const int runs = 10000;
  Rng rng(8);
  std::vector<cplx> x_t(runs);
  const cplx mean_t = oracle.marginal_mean(p.t_max);
  const double std_t = std::sqrt(oracle.marginal_var(p.t_max));
  for (cplx& c : x_t) c = mean_t + std_t * rng.normal_complex();

  SamplerConfig cfg;
  cfg.n_steps = 200;
  const ScoreFn fn = [&](const std::vector<cplx>& x, double tau, double sigma) {
    return oracle.evaluate(x, 1, runs, {}, tau, sigma);
  };
  const std::vector<cplx> out =
      reverse_sample(x_t, std::vector<cplx>(runs, y_val), fn, p, cfg, rng);

  cplx mean(0.0, 0.0);
  for (const cplx& c : out) mean += c;
  mean /= static_cast<double>(runs);
  double var = 0.0;
  for (const cplx& c : out) var += std::norm(c - mean);
  var /= static_cast<double>(runs);

  const double mean_err = std::abs(mean - m0) / std::abs(m0);
  const double std_err = std::abs(std::sqrt(var) - s0) / s0;
  r.pass = mean_err < 0.02 && std_err < 0.05;
  r.detail = "mean rel err " + fmt(mean_err) + " (tol 0.02), std rel err " + fmt(std_err) +
             " (tol 0.05), N=200, " + std::to_string(runs) + " runs";
  return r;
}

// ---------------------------------------------------------------------------
// 3. Variance-ODE identity.
// ---------------------------------------------------------------------------
Result criterion_3() {
  Result r{3, "variance ODE d(sigma^2)/dtau = g^2 - 2*gamma*sigma^2"};
  const OuveParams p;
  const double h = 1e-5;
  double worst = 0.0;
  for (int i = 1; i <= 50; ++i) {
    const double tau = p.t_max * i / 51.0;
    const double sp = kernel_std(tau + h, p), sm = kernel_std(tau - h, p);
    const double lhs = (sp * sp - sm * sm) / (2.0 * h);
    const double g = diffusion_coeff(tau, p);
    const double s = kernel_std(tau, p);
    worst = std::max(worst, std::abs(lhs - (g * g - 2.0 * p.gamma * s * s)));
  }
  r.pass = worst < 1e-6;
  r.detail = "max residual " + fmt(worst, 10) + " over 50 grid points (tol 1e-6)";
  return r;
}

// ---------------------------------------------------------------------------
// 4. Gradient integrity for both trainable networks.
// ---------------------------------------------------------------------------
Result criterion_4() {
  Result r{4, "backprop gradients match central finite differences"};
  const OuveParams p;
  const int bins = 5, frames = 4;
  const std::size_t n = static_cast<std::size_t>(bins) * frames;
  const double h = 1e-4;

  double worst = 0.0;
  int checked = 0;
  for (int input_trial = 0; input_trial < 3; ++input_trial) {
    Rng data_rng(300 + static_cast<std::uint64_t>(input_trial));
    const std::vector<cplx> x0 = random_complex(n, data_rng);
    const std::vector<cplx> y = random_complex(n, data_rng);

    TinyScoreNet score(2, 6, 3, 3, 8);
    PredictorNet predictor(6, 3, 3);
    Rng init(400 + static_cast<std::uint64_t>(input_trial));
    score.init(init);
    predictor.init(init);
    for (double& v : score.params()) v += 0.1 * init.normal();
    for (double& v : predictor.params()) v += 0.1 * init.normal();

    const std::uint64_t draw_seed = 500 + static_cast<std::uint64_t>(input_trial);
    std::vector<double> gs(score.param_count(), 0.0), gp(predictor.param_count(), 0.0);
    {
      Rng rng(draw_seed);
      storm_loss(score, predictor, x0, y, bins, frames, p, 1.0, rng, gs, gp, nullptr);
    }
    const auto loss_at = [&](const std::vector<double>& sp, const std::vector<double>& pp) {
      TinyScoreNet s2(2, 6, 3, 3, 8);
      PredictorNet p2(6, 3, 3);
      s2.set_params(sp);
      p2.set_params(pp);
      std::vector<double> a(s2.param_count(), 0.0), b(p2.param_count(), 0.0);
      Rng rng(draw_seed);
      return storm_loss(s2, p2, x0, y, bins, frames, p, 1.0, rng, a, b, nullptr);
    };

    Rng pick(600 + static_cast<std::uint64_t>(input_trial));
    for (int t = 0; t < 20; ++t) {
      const auto i = static_cast<std::size_t>(
          pick.uniform_int(0, static_cast<int>(score.param_count()) - 1));
      std::vector<double> plus = score.params(), minus = score.params();
      plus[i] += h;
      minus[i] -= h;
      const double fd =
          (loss_at(plus, predictor.params()) - loss_at(minus, predictor.params())) / (2.0 * h);
      worst = std::max(worst,
                       std::abs(fd - gs[i]) / std::max({std::abs(fd), std::abs(gs[i]), 1e-6}));
      ++checked;
    }
    for (int t = 0; t < 20; ++t) {
      const auto i = static_cast<std::size_t>(
          pick.uniform_int(0, static_cast<int>(predictor.param_count()) - 1));
      std::vector<double> plus = predictor.params(), minus = predictor.params();
      plus[i] += h;
      minus[i] -= h;
      const double fd =
          (loss_at(score.params(), plus) - loss_at(score.params(), minus)) / (2.0 * h);
      worst = std::max(worst,
                       std::abs(fd - gp[i]) / std::max({std::abs(fd), std::abs(gp[i]), 1e-6}));
      ++checked;
    }
  }
  r.pass = worst < 1e-4;
  r.detail = "worst rel err " + fmt(worst, 8) + " over " + std::to_string(checked) +
             " parameters, 3 inputs (tol 1e-4)";
  return r;
}

// ---------------------------------------------------------------------------
// 5. DSM-loss oracle values.
// ---------------------------------------------------------------------------
Result criterion_5() {
  Result r{5, "DSM loss: perfect score nulls it, zero score gives d/sigma^2"};
  const OuveParams p;
  const int bins = 8, frames = 4;
  const std::size_t d = static_cast<std::size_t>(bins) * frames;
  Rng rng(42);
  const std::vector<cplx> x0 = random_complex(d, rng);
  const std::vector<cplx> y = random_complex(d, rng);

  // Formula-level check with the literal stub s = -z/sigma: exact zero.
  bool exact_zero = true;
  for (int trial = 0; trial < 50; ++trial) {
    const double tau = rng.uniform(p.t_eps, p.t_max);
    const double sigma = kernel_std(tau, p);
    double loss = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const cplx z = rng.normal_complex();
      const cplx s = -(z / sigma);
      loss += std::norm(s + z / sigma);
    }
    if (loss != 0.0) exact_zero = false;
  }

  // Library path with the kernel-perfect score: zero to rounding.
  const KernelOracleScore oracle(x0, y, p);
  double worst_oracle = 0.0;
  for (int trial = 0; trial < 20; ++trial)
    worst_oracle = std::max(worst_oracle,
                            dsm_loss_eval(oracle, x0, y, {&y}, bins, frames, p, rng, nullptr));

  // Zero score: per-draw loss ||z||^2 / sigma^2, expectation d / sigma^2.
  const ZeroScore zero;
  bool per_draw_ok = true;
  double mean_scaled = 0.0;
  const int draws = 4000;
  for (int i = 0; i < draws; ++i) {
    DsmDiagnostics diag;
    const double loss = dsm_loss_eval(zero, x0, y, {&y}, bins, frames, p, rng, &diag);
    const double want = diag.z_norm_sq / (diag.sigma * diag.sigma);
    if (std::abs(loss - want) > 1e-9 * std::max(1.0, want)) per_draw_ok = false;
    mean_scaled += loss * diag.sigma * diag.sigma;
  }
  mean_scaled /= static_cast<double>(draws);
  const double expect_err =
      std::abs(mean_scaled - static_cast<double>(d)) / static_cast<double>(d);
  const bool expectation_ok = expect_err < 4.0 / std::sqrt(static_cast<double>(draws));

  r.pass = exact_zero && worst_oracle < 1e-18 && per_draw_ok && expectation_ok;
  r.detail = std::string("literal stub loss ") + (exact_zero ? "== 0" : "!= 0") +
             ", kernel-oracle residual " + fmt(worst_oracle, 24) +
             ", E[loss*sigma^2]/d rel err " + fmt(expect_err);
  return r;
}

// ---------------------------------------------------------------------------
// 6. Front-end fidelity.
// ---------------------------------------------------------------------------
Result criterion_6() {
  Result r{6, "front-end fidelity (stft/istft and warp/unwarp roundtrips)"};
  Rng rng(6);
  Waveform w;
  w.samples.resize(16000);
  for (double& s : w.samples) s = 0.5 * rng.uniform(-1.0, 1.0);

  const ComplexSpectrogram spec = stft(w, {});
  const Waveform back = istft(spec, static_cast<std::int64_t>(w.samples.size()));
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    num += (back.samples[i] - w.samples[i]) * (back.samples[i] - w.samples[i]);
    den += w.samples[i] * w.samples[i];
  }
  const double stft_err = std::sqrt(num / den);

  const ComplexSpectrogram round = unwarp(warp(spec, 0.5, 0.15));
  double wnum = 0.0, wden = 0.0;
  for (std::size_t i = 0; i < spec.data.size(); ++i) {
    wnum += std::norm(round.data[i] - spec.data[i]);
    wden += std::norm(spec.data[i]);
  }
  const double warp_err = std::sqrt(wnum / wden);

  r.pass = stft_err < 1e-6 && warp_err < 1e-9;
  r.detail = "stft/istft rel L2 " + fmt(stft_err, 12) + " (tol 1e-6), warp/unwarp rel " +
             fmt(warp_err, 12) + " (tol 1e-9)";
  return r;
}

// ---------------------------------------------------------------------------
// 7. Corruption model.
// ---------------------------------------------------------------------------
Result criterion_7() {
  Result r{7, "corruption model (SNR mixing, compressor, clipping, distributions)"};
  Rng rng(7);
  std::string fail;

  // mix_at_snr exactness.
  Waveform speech, noise;
  speech.samples.resize(8000);
  noise.samples.resize(8000);
  for (double& s : speech.samples) s = 0.4 * rng.uniform(-1.0, 1.0);
  for (double& s : noise.samples) s = 0.7 * rng.uniform(-1.0, 1.0);
  for (double snr_req : {-6.0, 3.3, 14.0}) {
    auto [noisy, scaled] = mix_at_snr(speech, noise, snr_req);
    (void)noisy;
    double ps = 0.0, pn = 0.0;
    for (double v : speech.samples) ps += v * v;
    for (double v : scaled.samples) pn += v * v;
    const double achieved = 10.0 * std::log10(ps / pn);
    if (std::abs(achieved - snr_req) > 1e-6) fail += " snr";
  }

  // Compressor identities.
  CompressorParams unit;
  unit.ratio = 1.0;
  const Waveform same = sidechain_compress(speech, noise, unit);
  for (std::size_t i = 0; i < same.samples.size(); ++i)
    if (std::abs(same.samples[i] - speech.samples[i]) > 1e-12) {
      fail += " ratio1";
      break;
    }
  CompressorParams quiet;
  quiet.ratio = 8.0;
  quiet.threshold_db = -20.0;
  Waveform low;
  low.samples.assign(8000, 0.01);  // 20 dB below threshold
  const Waveform same2 = sidechain_compress(speech, low, quiet);
  for (std::size_t i = 0; i < same2.samples.size(); ++i)
    if (std::abs(same2.samples[i] - speech.samples[i]) > 1e-12) {
      fail += " below-thr";
      break;
    }

  // Steady state: +10 dB overdrive at ratio 2 -> 5 dB +- 0.1.
  CompressorParams ss;
  ss.ratio = 2.0;
  ss.threshold_db = -20.0;
  Waveform over;
  over.samples.assign(16000, std::pow(10.0, -10.0 / 20.0));
  const double g = sidechain_gain_trajectory(over, ss, 16000.0).back();
  const double reduction = -20.0 * std::log10(g);
  if (std::abs(reduction - 5.0) > 0.1) fail += " steady-state";

  // Hard clip exactness and eta=1 no-op.
  Waveform clip_in;
  clip_in.samples = {0.5, -2.0, 1.0};
  const Waveform clipped = hard_clip(clip_in, 0.9);
  if (std::abs(clipped.samples[1] + 1.8) > 1e-15) fail += " clip";
  const Waveform noop = hard_clip(clip_in, 1.0);
  for (std::size_t i = 0; i < clip_in.samples.size(); ++i)
    if (noop.samples[i] != clip_in.samples[i]) {
      fail += " clip-noop";
      break;
    }

  // Distribution tests at 10^4 draws.
  std::vector<double> snr_s, ratio_s, attack_s, release_s, gain_s, eta_s, thr_s;
  long gust_counts[10] = {0};
  long clip_count = 0;
  const long draws = 10000;
  Rng srng(1234);
  for (long i = 0; i < draws; ++i) {
    const CorruptionParams cp = sample_corruption_params(srng);
    snr_s.push_back(cp.snr_db);
    ratio_s.push_back(cp.compressor.ratio);
    attack_s.push_back(cp.compressor.attack_ms);
    release_s.push_back(cp.compressor.release_ms);
    gain_s.push_back(cp.compressor.sidechain_gain);
    thr_s.push_back(cp.compressor.threshold_db);
    if (cp.clip) {
      ++clip_count;
      eta_s.push_back(cp.eta);
    }
    const AirflowProfile prof = sample_airflow_profile(2.0, srng);
    ++gust_counts[prof.gusts.size() - 1];
  }
  using namespace oracles;
  const auto ks_fail = [&](const std::vector<double>& s, double lo, double hi) {
    return ks_statistic(s, [=](double x) { return uniform_cdf(x, lo, hi); }) >=
           ks_critical(s.size());
  };
  if (ks_fail(snr_s, -6, 14)) fail += " ks-snr";
  if (ks_fail(ratio_s, 1, 20)) fail += " ks-ratio";
  if (ks_fail(attack_s, 5, 100)) fail += " ks-attack";
  if (ks_fail(release_s, 5, 500)) fail += " ks-release";
  if (ks_fail(gain_s, 0.8, 1.2)) fail += " ks-gain";
  if (ks_fail(eta_s, 0.85, 1.0)) fail += " ks-eta";
  if (ks_fail(thr_s, -30, -10)) fail += " ks-threshold";
  if (std::abs(static_cast<double>(clip_count) / draws - 0.75) > 0.02) fail += " clip-freq";
  std::vector<long> gusts(gust_counts, gust_counts + 10);
  if (chi_square_uniform(gusts, draws) >= chi_square_critical(9)) fail += " chi2-gusts";

  r.pass = fail.empty();
  r.detail = fail.empty() ? "exact mixing, compressor laws, clipping, KS/chi-square at 10^4 draws"
                          : "failed:" + fail;
  return r;
}

// ---------------------------------------------------------------------------
// 8. Network-call accounting.
// ---------------------------------------------------------------------------
Result criterion_8() {
  Result r{8, "network-call accounting (21 calls storm, 60 generative)"};
  Rng rng(88);
  Waveform noisy;
  noisy.samples.resize(16000);
  double phase = 0.0;
  for (double& s : noisy.samples) {
    phase += 2.0 * M_PI * 180.0 / 16000.0;
    s = 0.4 * std::sin(phase) + 0.05 * rng.normal();
  }

  const IdentityPredictor predictor;
  TinyScoreNet storm_score(2, 6, 3, 3, 8);
  TinyScoreNet gen_score(1, 6, 3, 3, 8);
  Rng init(89);
  storm_score.init(init);
  gen_score.init(init);
  const FrontEnd fe;

  EnhanceStats storm_stats;
  {
    const OuveParams p;
    SamplerConfig cfg;
    cfg.n_steps = 20;
    Rng sample_rng(90);
    enhance_storm(noisy, predictor, storm_score, p, cfg, fe, sample_rng, &storm_stats);
  }
  EnhanceStats gen_stats;
  {
    OuveParams p;
    p.gamma = 2.5;
    p.sigma_max = 0.75;
    SamplerConfig cfg;
    cfg.n_steps = 30;
    cfg.corrector_steps = 1;
    cfg.corrector_snr = 0.5;
    Rng sample_rng(91);
    enhance_generative(noisy, gen_score, p, cfg, fe, sample_rng, &gen_stats);
  }
  r.pass = storm_stats.total() == 21 && storm_stats.predictor_calls == 1 &&
           gen_stats.score_calls == 60 && gen_stats.predictor_calls == 0;
  r.detail = "storm " + std::to_string(storm_stats.predictor_calls) + "+" +
             std::to_string(storm_stats.score_calls) + " calls (want 1+20), generative " +
             std::to_string(gen_stats.score_calls) + " calls (want 60)";
  return r;
}

// ---------------------------------------------------------------------------
// 9. End-to-end toy experiment through the CLI.
// ---------------------------------------------------------------------------
Result criterion_9() {
  Result r{9, "end-to-end toy experiment (train, enhance, instrument)"};
  const fs::path work = "/tmp/storm_acceptance_e2e";
  fs::remove_all(work);
  fs::create_directories(work);

  // Corpus: 200 training + 24 held-out clips of 2 s.
  {
    std::ofstream cfg(work / "synth.cfg");
    cfg << "count = 200\n";
  }
  {
    std::ofstream cfg(work / "synth_test.cfg");
    cfg << "count = 24\n";
  }
  if (run_cli("--seed 11 synthesize --config " + (work / "synth.cfg").string() + " --out " +
              (work / "train_corpus").string()) != 0) {
    r.detail = "corpus synthesis failed";
    return r;
  }
  if (run_cli("--seed 12 synthesize --config " + (work / "synth_test.cfg").string() +
              " --out " + (work / "test_corpus").string()) != 0) {
    r.detail = "held-out synthesis failed";
    return r;
  }

  {
    std::ofstream cfg(work / "train.cfg");
    cfg << "pretrain_max_epochs = 8\n"
        << "max_epochs = 10\n"
        << "crop_frames = 64\n"
        << "batch = 4\n"
        << "hidden_channels = 12\n";
  }
  const auto t0 = Clock::now();
  if (run_cli("--seed 13 train --config " + (work / "train.cfg").string() + " --data " +
              (work / "train_corpus").string() + " --checkpoint-out " +
              (work / "storm.ckpt").string() + " --history-out " +
              (work / "history.txt").string()) != 0) {
    r.detail = "training failed";
    return r;
  }
  const double train_minutes = std::chrono::duration<double>(Clock::now() - t0).count() / 60.0;

  const std::string noisy_dir = (work / "test_corpus" / "noisy").string();
  if (run_cli("--seed 14 --jobs 1 enhance --mode storm --checkpoint " +
              (work / "storm.ckpt").string() + " --in " + noisy_dir + " --out " +
              (work / "enhanced_storm").string()) != 0) {
    r.detail = "storm enhancement failed";
    return r;
  }
  if (run_cli("--seed 15 --jobs 1 enhance --mode predictive --checkpoint " +
              (work / "storm.ckpt").string() + " --in " + noisy_dir + " --out " +
              (work / "enhanced_pred").string()) != 0) {
    r.detail = "predictive enhancement failed";
    return r;
  }

  // Instrument on the held-out clips.
  double si_noisy = 0.0, si_storm = 0.0, si_pred = 0.0, lsd_noisy = 0.0, lsd_storm = 0.0;
  int count = 0;
  for (const std::string& clean_path :
       list_wav_files((work / "test_corpus" / "clean").string())) {
    const std::string name = fs::path(clean_path).filename().string();
    const Waveform clean = read_wav(clean_path);
    const Waveform noisy = read_wav((work / "test_corpus" / "noisy" / name).string());
    const Waveform storm_out = read_wav((work / "enhanced_storm" / name).string());
    const Waveform pred_out = read_wav((work / "enhanced_pred" / name).string());
    si_noisy += si_sdr(clean, noisy);
    si_storm += si_sdr(clean, storm_out);
    si_pred += si_sdr(clean, pred_out);
    lsd_noisy += log_spectral_distance(clean, noisy);
    lsd_storm += log_spectral_distance(clean, storm_out);
    ++count;
  }
  si_noisy /= count;
  si_storm /= count;
  si_pred /= count;
  lsd_noisy /= count;
  lsd_storm /= count;

  const bool improves = si_storm >= si_noisy + 3.0;
  const bool near_predictive = si_storm >= si_pred - 3.0;
  const bool lsd_better = lsd_storm < lsd_noisy;
  const bool in_budget = train_minutes <= 30.0;
  r.pass = improves && near_predictive && lsd_better && in_budget;
  r.detail = "si-sdr noisy " + fmt(si_noisy, 2) + " dB, storm " + fmt(si_storm, 2) +
             " dB, predictive " + fmt(si_pred, 2) + " dB; lsd noisy " + fmt(lsd_noisy, 2) +
             " dB, storm " + fmt(lsd_storm, 2) + " dB; training " + fmt(train_minutes, 1) +
             " min (budget 30)";
  return r;
}

// ---------------------------------------------------------------------------
// 10. Byte-level determinism of every CLI command.
// ---------------------------------------------------------------------------
Result criterion_10() {
  Result r{10, "CLI determinism (fixed seed, --jobs 1, byte-identical reruns)"};
  const fs::path work = "/tmp/storm_acceptance_determinism";
  fs::remove_all(work);
  fs::create_directories(work);

  {
    std::ofstream cfg(work / "synth.cfg");
    cfg << "count = 6\nduration = 1.0\n";
  }
  {
    std::ofstream cfg(work / "train.cfg");
    cfg << "pretrain_max_epochs = 2\nmax_epochs = 2\ncrop_frames = 32\nbatch = 2\n"
        << "hidden_channels = 6\nval_fraction = 0.34\n";
  }

  std::string why;
  for (const char run : {'a', 'b'}) {
    const fs::path dir = work / std::string(1, run);
    fs::create_directories(dir);
    if (run_cli("--seed 21 --jobs 1 synthesize --config " + (work / "synth.cfg").string() +
                " --out " + (dir / "corpus").string()) != 0) {
      r.detail = "synthesize failed";
      return r;
    }
    if (run_cli("--seed 22 --jobs 1 verify-sde --out " + (dir / "sde_report.txt").string()) !=
        0) {
      r.detail = "verify-sde failed";
      return r;
    }
    if (run_cli("--seed 23 --jobs 1 train --config " + (work / "train.cfg").string() +
                " --data " + (dir / "corpus").string() + " --checkpoint-out " +
                (dir / "model.ckpt").string() + " --history-out " +
                (dir / "history.txt").string()) != 0) {
      r.detail = "train failed";
      return r;
    }
    if (run_cli("--seed 24 --jobs 1 enhance --mode storm --steps 3 --checkpoint " +
                (dir / "model.ckpt").string() + " --in " + (dir / "corpus" / "noisy").string() +
                " --out " + (dir / "enhanced").string()) != 0) {
      r.detail = "enhance failed";
      return r;
    }
    if (run_cli("--seed 25 --jobs 1 evaluate --ref " + (dir / "corpus" / "clean").string() +
                " --est " + (dir / "enhanced").string() + " --out " +
                (dir / "metrics.txt").string()) != 0) {
      r.detail = "evaluate failed";
      return r;
    }
  }

  const fs::path a = work / "a", b = work / "b";
  bool ok = true;
  const auto check_dir = [&](const fs::path& da, const fs::path& db) {
    std::string local_why;
    if (!dirs_equal(da, db, local_why)) {
      ok = false;
      why += " " + da.filename().string() + ":" + local_why;
    }
  };
  check_dir(a / "corpus" / "clean", b / "corpus" / "clean");
  check_dir(a / "corpus" / "noisy", b / "corpus" / "noisy");
  check_dir(a / "enhanced", b / "enhanced");
  for (const std::string f :
       {"corpus/manifest.txt", "sde_report.txt", "model.ckpt", "history.txt", "metrics.txt"}) {
    if (slurp(a / f) != slurp(b / f)) {
      ok = false;
      why += " " + f;
    }
  }
  r.pass = ok;
  r.detail = ok ? "synthesize, verify-sde, train, enhance, evaluate byte-identical across reruns"
                : "mismatch:" + why;
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) g_cli = argv[++i];
    if (arg == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
  }
  if (g_cli.empty()) {
    const fs::path guess = fs::path(argv[0]).parent_path().parent_path() / "tools" / "storm";
    if (fs::exists(guess)) g_cli = guess.string();
  }

  const std::vector<std::function<Result()>> criteria{
      criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
      criterion_6, criterion_7, criterion_8, criterion_9, criterion_10};

  bool all_pass = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<int>(i + 1) != only) continue;
    if ((i + 1 == 9 || i + 1 == 10) && g_cli.empty()) {
      std::printf("[FAIL] criterion %zu: CLI path not given (--cli)\n", i + 1);
      all_pass = false;
      continue;
    }
    Result res;
    const auto t0 = Clock::now();
    try {
      res = criteria[i]();
    } catch (const std::exception& e) {
      res.id = static_cast<int>(i + 1);
      res.pass = false;
      res.detail = std::string("exception: ") + e.what();
    }
    res.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("[%s] criterion %zu: %s — %s (%.1f s)\n", res.pass ? "PASS" : "FAIL", i + 1,
                res.name.c_str(), res.detail.c_str(), res.seconds);
    std::fflush(stdout);
    all_pass = all_pass && res.pass;
  }
  std::printf("%s\n", all_pass ? "ACCEPTANCE: ALL CRITERIA PASSED"
                               : "ACCEPTANCE: FAILURES PRESENT");
  return all_pass ? 0 : 1;
}
