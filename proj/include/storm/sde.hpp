#pragma once

#include <functional>
#include <vector>

#include "storm/common.hpp"
#include "storm/signal.hpp"

namespace storm {

/// Ornstein-Uhlenbeck variance-exploding process parameters. The drift pulls
/// the state toward the conditioning signal at rate gamma while the injected
/// Gaussian noise grows geometrically from sigma_min to sigma_max.
struct OuveParams {
  double gamma = 1.5;
  double sigma_min = 0.05;
  double sigma_max = 0.5;
  double t_max = 1.0;
  double t_eps = 0.03;
};

void validate(const OuveParams& p);

struct ProcessState {
  ComplexSpectrogram x;
  double tau = 0.0;
};

struct SamplerConfig {
  int n_steps = 20;
  int corrector_steps = 0;    // 0 or 1 annealed-Langevin step per grid point
  double corrector_snr = 0.5; // step-size parameter r
};

void validate(const SamplerConfig& cfg);

/// Drift f(x, y) = gamma * (y - x), elementwise.
std::vector<cplx> drift(const std::vector<cplx>& x, const std::vector<cplx>& y,
                        const OuveParams& p);

/// Diffusion coefficient g(tau) = sigma_min * (sigma_max/sigma_min)^tau
/// * sqrt(2 * log(sigma_max/sigma_min)).
double diffusion_coeff(double tau, const OuveParams& p);

/// Perturbation-kernel mean: exp(-gamma*tau)*x0 + (1 - exp(-gamma*tau))*y.
std::vector<cplx> kernel_mean(const std::vector<cplx>& x0, const std::vector<cplx>& y,
                              double tau, const OuveParams& p);

/// Closed-form perturbation-kernel standard deviation (per complex bin,
/// total variance convention: E|x - mu|^2 = sigma(tau)^2).
double kernel_std(double tau, const OuveParams& p);

/// Draws x_tau = mean + sigma(tau) * z with z circularly-symmetric complex
/// standard normal per bin.
std::vector<cplx> sample_perturbation(const std::vector<cplx>& x0, const std::vector<cplx>& y,
                                      double tau, const OuveParams& p, Rng& rng);

/// Euler-Maruyama forward simulation from tau=0 to tau=t_max. The observer,
/// when set, is called after every step with (step index, tau, state).
using ForwardObserver = std::function<void(int, double, const std::vector<cplx>&)>;
void forward_simulate(const std::vector<cplx>& x0, const std::vector<cplx>& y,
                      const OuveParams& p, int n_steps, Rng& rng,
                      const ForwardObserver& observe = nullptr);

/// Full trajectory variant (n_steps + 1 states including the initial one).
std::vector<std::pair<double, std::vector<cplx>>> forward_simulate_trajectory(
    const std::vector<cplx>& x0, const std::vector<cplx>& y, const OuveParams& p, int n_steps,
    Rng& rng);

/// Prior sample at tau = t_max: mean y, per-bin std sigma(t_max).
ProcessState sample_prior(const ComplexSpectrogram& y, const OuveParams& p, Rng& rng);

/// Score callback for the reverse sampler: (x, tau, sigma) -> score values,
/// shaped like x. Conditioning is baked into the callable.
using ScoreFn = std::function<std::vector<cplx>(const std::vector<cplx>&, double, double)>;

/// Reverse-SDE sampler on a uniform grid tau_k = t_max * (1 - k/N), k=0..N.
/// Starts from `initial` (the state at tau = t_max) and anchors the drift at
/// `anchor`. Performs one optional annealed-Langevin corrector step per grid
/// point before the Euler-Maruyama predictor step. Exactly
/// N * (1 + corrector_steps) score evaluations.
std::vector<cplx> reverse_sample(const std::vector<cplx>& initial, const std::vector<cplx>& anchor,
                                 const ScoreFn& score, const OuveParams& p,
                                 const SamplerConfig& cfg, Rng& rng);

}  // namespace storm
