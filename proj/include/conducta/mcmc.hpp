#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "conducta/gp.hpp"

namespace conducta {

/// Gamma prior on a precision phi:
///   p(phi) = (a / 2w)^{a/2} / Gamma(a/2) * phi^{a/2 - 1} * exp(-phi a / 2w)
/// with shape a and prior mean w.
struct GammaPrecisionPrior {
  double shape = 2.0;
  double omega = 1.0;

  void validate() const;
  double log_density(double phi) const;
  double density(double phi) const;
};

/// One prior per hyperparameter, placed on its precision: lengthscale^-2,
/// signal_var^-1 and noise_var^-1. An empty slot means an improper flat prior
/// on the log-parameter (no prior term and no Jacobian).
struct HyperPriors {
  std::optional<GammaPrecisionPrior> lengthscale = GammaPrecisionPrior{};
  std::optional<GammaPrecisionPrior> signal_var = GammaPrecisionPrior{};
  std::optional<GammaPrecisionPrior> noise_var = GammaPrecisionPrior{};

  static HyperPriors flat() { return {std::nullopt, std::nullopt, std::nullopt}; }
};

/// Sum of the gamma log densities at the precisions. No Jacobian terms.
/// Throws InputError for non-positive parameters.
double log_prior(const Hyperparams<>& hp, const HyperPriors& priors);

/// Log posterior density of eta = (log lengthscale, log signal_var,
/// log noise_var): log marginal likelihood + log prior + log |d phi / d eta|.
/// Returns -inf outside the support or when the fit cannot be factored.
double log_posterior(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Hyperparams<>& hp,
                     const HyperPriors& priors);

Eigen::Vector3d to_log_params(const Hyperparams<>& hp);
Hyperparams<> from_log_params(const Eigen::Vector3d& eta);

struct MhConfig {
  std::size_t steps = 2000;
  std::size_t burn_in = 500;
  std::array<double, 3> proposal_scales{0.3, 0.3, 0.3};  // random-walk std in log space
  std::size_t chains = 4;
  std::uint64_t seed = 0;
  bool adapt = true;  // tune scales during burn-in only

  void validate() const;
};

/// Output of one random-walk Metropolis chain over a generic log density.
struct MhChain {
  std::vector<Eigen::VectorXd> states;  // post-burn-in
  std::vector<double> log_density;      // post-burn-in
  std::vector<char> accepted;           // post-burn-in
  double acceptance_rate = 0.0;         // over post-burn-in steps
  Eigen::VectorXd final_scales;
};

/// Random-walk Metropolis with an isotropic-per-coordinate Gaussian proposal.
/// Acceptance is decided in log space. When `adapt` is set the scales are
/// rescaled every 50 burn-in steps toward an acceptance rate in [0.2, 0.5]
/// and frozen afterwards. `stream` selects an independent RNG stream for the
/// same seed.
MhChain metropolis_chain(const std::function<double(const Eigen::VectorXd&)>& log_density, Eigen::VectorXd start,
                         Eigen::VectorXd scales, std::size_t steps, std::size_t burn_in, bool adapt,
                         std::uint64_t seed, std::uint64_t stream);

struct HyperChain {
  std::vector<Hyperparams<>> draws;
  std::vector<double> log_posterior;
  std::vector<char> accepted;
  double acceptance_rate = 0.0;
};

struct PosteriorSamples {
  std::vector<HyperChain> chains;
  std::size_t burn_in = 0;

  std::vector<Hyperparams<>> pooled() const;
};

/// Default chain start from the data: lengthscale = median pairwise input
/// distance, signal_var = target variance, noise_var = signal_var / 10.
Hyperparams<> initial_hyperparams(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// Independent chains over log-hyperparameters targeting log_posterior.
/// Chain c starts at the data-driven initial point perturbed by N(0, 0.5^2)
/// in log space and runs on RNG stream c.
PosteriorSamples mh_sample(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const HyperPriors& priors,
                           const MhConfig& cfg);

/// Effective sample size summed over chains, using autocorrelations truncated
/// at the first non-positive pair sum (initial positive sequence). Empty when
/// a chain has zero variance.
std::optional<double> effective_sample_size(const std::vector<std::vector<double>>& chains);

/// Split R-hat: each chain is halved and the potential scale reduction is
/// computed over the halves. Empty for fewer than two chains or when the
/// within-chain variance is zero.
std::optional<double> split_rhat(const std::vector<std::vector<double>>& chains);

struct Diagnostics {
  std::array<std::optional<double>, 3> ess;   // per log-parameter
  std::array<std::optional<double>, 3> rhat;  // per log-parameter
  std::vector<double> acceptance;             // per chain
};

/// Diagnostics on the log-parameters (lengthscale, signal_var, noise_var).
Diagnostics diagnostics(const PosteriorSamples& samples);

struct MixturePrediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  std::size_t draws_used = 0;
};

/// Hyperparameter draws thinned evenly to at most `subsample` settings.
std::vector<Hyperparams<>> thin_draws(const std::vector<Hyperparams<>>& draws, std::size_t subsample);

/// Monte Carlo predictive over hyperparameters: fits one GP per draw and
/// combines moments, mean = E[mu], var = E[var] + E[(mu - mean)^2]. Draws whose
/// fit fails are skipped; throws NumericalError when none can be fitted.
MixturePrediction predictive_mixture(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     const std::vector<Hyperparams<>>& draws, const Eigen::MatrixXd& xstar);

MixturePrediction predictive_mixture(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     const PosteriorSamples& samples, const Eigen::MatrixXd& xstar,
                                     std::size_t subsample);

/// CSV: chain,step,lengthscale,signal_var,noise_var,log_posterior,accepted
void write_samples_csv(std::ostream& out, const PosteriorSamples& samples);

}  // namespace conducta
