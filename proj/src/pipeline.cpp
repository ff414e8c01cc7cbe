#include "storm/pipeline.hpp"

#include <cmath>

namespace storm {

namespace {

struct FrontEndState {
  ComplexSpectrogram y_spec;  // warped, normalized
  double peak = 1.0;
};

FrontEndState analyze(const Waveform& noisy, const FrontEnd& fe) {
  validate(noisy);
  double peak = 0.0;
  for (double s : noisy.samples) peak = std::max(peak, std::abs(s));
  if (peak <= 0.0) throw DataError("enhance: silent input");

  Waveform scaled = noisy;
  for (double& s : scaled.samples) s /= peak;

  FrontEndState state;
  state.peak = peak;
  state.y_spec = warp(stft(scaled, fe.stft), fe.warp_exponent, fe.warp_scale);
  return state;
}

Waveform resynthesize(const ComplexSpectrogram& model_out, const FrontEndState& state,
                      const Waveform& noisy) {
  ComplexSpectrogram spec = unwarp(model_out);
  Waveform out = istft(spec, static_cast<std::int64_t>(noisy.samples.size()), noisy.sample_rate);
  for (double& s : out.samples) s *= state.peak;
  return out;
}

ComplexSpectrogram with_data(const ComplexSpectrogram& like, std::vector<cplx> data) {
  ComplexSpectrogram out = like;
  out.data = std::move(data);
  return out;
}

}  // namespace

Waveform enhance_storm(const Waveform& noisy, const PredictorModel& predictor,
                       const ScoreModel& score, const OuveParams& p, const SamplerConfig& cfg,
                       const FrontEnd& fe, Rng& rng, EnhanceStats* stats) {
  validate(p);
  validate(cfg);
  const FrontEndState state = analyze(noisy, fe);
  const ComplexSpectrogram& y = state.y_spec;

  const std::vector<cplx> d = predictor.evaluate(y.data, y.bins, y.frames);
  if (stats) stats->predictor_calls += 1;

  // Start sample: D(y) + sigma(T) z.
  std::vector<cplx> x_t = d;
  const double sigma_t = kernel_std(p.t_max, p);
  for (cplx& c : x_t) c += sigma_t * rng.normal_complex();

  const CountingScore counted(score);
  const std::vector<const std::vector<cplx>*> cond{&y.data, &d};
  const ScoreFn score_fn = [&](const std::vector<cplx>& x, double tau, double sigma) {
    return counted.evaluate(x, y.bins, y.frames, cond, tau, sigma);
  };

  const std::vector<cplx> x0 = reverse_sample(x_t, d, score_fn, p, cfg, rng);
  if (stats) stats->score_calls += counted.calls();

  return resynthesize(with_data(y, x0), state, noisy);
}

Waveform enhance_generative(const Waveform& noisy, const ScoreModel& score, const OuveParams& p,
                            const SamplerConfig& cfg, const FrontEnd& fe, Rng& rng,
                            EnhanceStats* stats) {
  validate(p);
  validate(cfg);
  const FrontEndState state = analyze(noisy, fe);
  const ComplexSpectrogram& y = state.y_spec;

  std::vector<cplx> x_t = y.data;
  const double sigma_t = kernel_std(p.t_max, p);
  for (cplx& c : x_t) c += sigma_t * rng.normal_complex();

  const CountingScore counted(score);
  const std::vector<const std::vector<cplx>*> cond{&y.data};
  const ScoreFn score_fn = [&](const std::vector<cplx>& x, double tau, double sigma) {
    return counted.evaluate(x, y.bins, y.frames, cond, tau, sigma);
  };

  const std::vector<cplx> x0 = reverse_sample(x_t, y.data, score_fn, p, cfg, rng);
  if (stats) stats->score_calls += counted.calls();

  return resynthesize(with_data(y, x0), state, noisy);
}

Waveform enhance_predictive(const Waveform& noisy, const PredictorModel& predictor,
                            const FrontEnd& fe, EnhanceStats* stats) {
  const FrontEndState state = analyze(noisy, fe);
  const ComplexSpectrogram& y = state.y_spec;

  const std::vector<cplx> d = predictor.evaluate(y.data, y.bins, y.frames);
  if (stats) stats->predictor_calls += 1;

  return resynthesize(with_data(y, d), state, noisy);
}

}  // namespace storm
