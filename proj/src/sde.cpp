#include "storm/sde.hpp"

#include <cmath>

namespace storm {

namespace {

void require_same_shape(const std::vector<cplx>& a, const std::vector<cplx>& b, const char* op) {
  if (a.size() != b.size()) throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

double norm2(const std::vector<cplx>& v) {
  double acc = 0.0;
  for (const cplx& c : v) acc += std::norm(c);
  return std::sqrt(acc);
}

}  // namespace

void validate(const OuveParams& p) {
  if (p.gamma <= 0.0) throw std::invalid_argument("ouve: gamma must be > 0");
  // sigma_min == sigma_max is tolerated as the zero-noise limit (g == 0).
  if (p.sigma_min <= 0.0 || p.sigma_max < p.sigma_min)
    throw std::invalid_argument("ouve: need 0 < sigma_min <= sigma_max");
  if (p.t_eps <= 0.0 || p.t_eps >= p.t_max)
    throw std::invalid_argument("ouve: need 0 < t_eps < t_max");
}

void validate(const SamplerConfig& cfg) {
  if (cfg.n_steps < 1) throw std::invalid_argument("sampler: n_steps must be >= 1");
  if (cfg.corrector_steps < 0 || cfg.corrector_steps > 1)
    throw std::invalid_argument("sampler: corrector_steps must be 0 or 1");
  if (cfg.corrector_steps > 0 && cfg.corrector_snr <= 0.0)
    throw std::invalid_argument("sampler: corrector_snr must be > 0");
}

std::vector<cplx> drift(const std::vector<cplx>& x, const std::vector<cplx>& y,
                        const OuveParams& p) {
  require_same_shape(x, y, "drift");
  std::vector<cplx> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = p.gamma * (y[i] - x[i]);
  return out;
}

double diffusion_coeff(double tau, const OuveParams& p) {
  const double ratio = p.sigma_max / p.sigma_min;
  const double log_ratio = std::log(ratio);
  return p.sigma_min * std::pow(ratio, tau) * std::sqrt(2.0 * log_ratio);
}

std::vector<cplx> kernel_mean(const std::vector<cplx>& x0, const std::vector<cplx>& y,
                              double tau, const OuveParams& p) {
  require_same_shape(x0, y, "kernel_mean");
  const double w0 = std::exp(-p.gamma * tau);
  std::vector<cplx> out(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) out[i] = w0 * x0[i] + (1.0 - w0) * y[i];
  return out;
}

double kernel_std(double tau, const OuveParams& p) {
  const double log_ratio = std::log(p.sigma_max / p.sigma_min);
  const double var = p.sigma_min * p.sigma_min *
                     (std::pow(p.sigma_max / p.sigma_min, 2.0 * tau) -
                      std::exp(-2.0 * p.gamma * tau)) *
                     log_ratio / (p.gamma + log_ratio);
  return std::sqrt(std::max(var, 0.0));
}

std::vector<cplx> sample_perturbation(const std::vector<cplx>& x0, const std::vector<cplx>& y,
                                      double tau, const OuveParams& p, Rng& rng) {
  std::vector<cplx> out = kernel_mean(x0, y, tau, p);
  const double sigma = kernel_std(tau, p);
  for (cplx& c : out) c += sigma * rng.normal_complex();
  return out;
}

void forward_simulate(const std::vector<cplx>& x0, const std::vector<cplx>& y,
                      const OuveParams& p, int n_steps, Rng& rng,
                      const ForwardObserver& observe) {
  require_same_shape(x0, y, "forward_simulate");
  if (n_steps < 1) throw std::invalid_argument("forward_simulate: n_steps must be >= 1");

  const double dt = p.t_max / n_steps;
  const double sqrt_dt = std::sqrt(dt);
  std::vector<cplx> x = x0;
  for (int k = 0; k < n_steps; ++k) {
    const double tau = k * dt;
    const double g = diffusion_coeff(tau, p);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] += p.gamma * (y[i] - x[i]) * dt + g * sqrt_dt * rng.normal_complex();
    }
    if (observe) observe(k + 1, (k + 1) * dt, x);
  }
}

std::vector<std::pair<double, std::vector<cplx>>> forward_simulate_trajectory(
    const std::vector<cplx>& x0, const std::vector<cplx>& y, const OuveParams& p, int n_steps,
    Rng& rng) {
  std::vector<std::pair<double, std::vector<cplx>>> traj;
  traj.reserve(static_cast<std::size_t>(n_steps) + 1);
  traj.emplace_back(0.0, x0);
  forward_simulate(x0, y, p, n_steps, rng,
                   [&traj](int, double tau, const std::vector<cplx>& x) {
                     traj.emplace_back(tau, x);
                   });
  return traj;
}

ProcessState sample_prior(const ComplexSpectrogram& y, const OuveParams& p, Rng& rng) {
  if (!all_finite(y.data)) throw std::invalid_argument("sample_prior: non-finite conditioning");
  ProcessState state;
  state.tau = p.t_max;
  state.x = y;
  const double sigma = kernel_std(p.t_max, p);
  for (cplx& c : state.x.data) c += sigma * rng.normal_complex();
  return state;
}

std::vector<cplx> reverse_sample(const std::vector<cplx>& initial, const std::vector<cplx>& anchor,
                                 const ScoreFn& score, const OuveParams& p,
                                 const SamplerConfig& cfg, Rng& rng) {
  require_same_shape(initial, anchor, "reverse_sample");
  validate(cfg);

  const int n = cfg.n_steps;
  const double dt = p.t_max / n;
  const double sqrt_dt = std::sqrt(dt);

  std::vector<cplx> x = initial;
  std::vector<cplx> z(x.size());

  for (int k = 0; k < n; ++k) {
    const double tau = p.t_max * (1.0 - static_cast<double>(k) / n);
    const double sigma = kernel_std(tau, p);
    const double g = diffusion_coeff(tau, p);

    if (cfg.corrector_steps == 1) {
      const std::vector<cplx> s = score(x, tau, sigma);
      if (!all_finite(s))
        throw NumericError("reverse_sample: non-finite score at tau=" + std::to_string(tau));
      for (cplx& c : z) c = rng.normal_complex();
      const double s_norm = norm2(s);
      if (s_norm > 0.0) {
        const double eps = 2.0 * std::pow(cfg.corrector_snr * norm2(z) / s_norm, 2.0);
        const double noise_scale = std::sqrt(2.0 * eps);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += eps * s[i] + noise_scale * z[i];
      }
    }

    const std::vector<cplx> s = score(x, tau, sigma);
    if (!all_finite(s))
      throw NumericError("reverse_sample: non-finite score at tau=" + std::to_string(tau));
    for (cplx& c : z) c = rng.normal_complex();
    const double g2 = g * g;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const cplx f = p.gamma * (anchor[i] - x[i]);
      x[i] += -(f - g2 * s[i]) * dt + g * sqrt_dt * z[i];
    }
    if (!all_finite(x))
      throw NumericError("reverse_sample: state diverged at tau=" + std::to_string(tau));
  }
  return x;
}

}  // namespace storm
