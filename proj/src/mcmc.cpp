#include "conducta/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include "conducta/error.hpp"
#include "conducta/io.hpp"
#include "conducta/parallel.hpp"

namespace conducta {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void GammaPrecisionPrior::validate() const {
  if (!(shape > 0.0) || !(omega > 0.0) || !std::isfinite(shape) || !std::isfinite(omega)) {
    throw InputError("gamma prior needs shape > 0 and omega > 0");
  }
}

double GammaPrecisionPrior::log_density(double phi) const {
  if (!(phi > 0.0)) return kNegInf;
  const double half = 0.5 * shape;
  const double rate = shape / (2.0 * omega);
  return half * std::log(rate) - std::lgamma(half) + (half - 1.0) * std::log(phi) - phi * rate;
}

double GammaPrecisionPrior::density(double phi) const { return std::exp(log_density(phi)); }

double log_prior(const Hyperparams<>& hp, const HyperPriors& priors) {
  if (!(hp.lengthscale > 0.0) || !(hp.signal_var > 0.0) || !(hp.noise_var > 0.0)) {
    throw InputError("log_prior needs strictly positive hyperparameters");
  }
  double lp = 0.0;
  if (priors.lengthscale) lp += priors.lengthscale->log_density(1.0 / (hp.lengthscale * hp.lengthscale));
  if (priors.signal_var) lp += priors.signal_var->log_density(1.0 / hp.signal_var);
  if (priors.noise_var) lp += priors.noise_var->log_density(1.0 / hp.noise_var);
  return lp;
}

Eigen::Vector3d to_log_params(const Hyperparams<>& hp) {
  return {std::log(hp.lengthscale), std::log(hp.signal_var), std::log(hp.noise_var)};
}

Hyperparams<> from_log_params(const Eigen::Vector3d& eta) {
  return {std::exp(eta[0]), std::exp(eta[1]), std::exp(eta[2])};
}

double log_posterior(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Hyperparams<>& hp,
                     const HyperPriors& priors) {
  if (!hp.valid() || !(hp.noise_var > 0.0)) return kNegInf;
  double lml = 0.0;
  try {
    lml = GpModel::fit(x, y, hp).log_marginal_likelihood();
  } catch (const NumericalError&) {
    return kNegInf;
  }
  // |d phi / d eta|: phi = exp(-2 eta) for the lengthscale, exp(-eta) for the
  // two variances.
  double log_jacobian = 0.0;
  if (priors.lengthscale) log_jacobian += std::numbers::ln2 - 2.0 * std::log(hp.lengthscale);
  if (priors.signal_var) log_jacobian -= std::log(hp.signal_var);
  if (priors.noise_var) log_jacobian -= std::log(hp.noise_var);
  const double total = lml + log_prior(hp, priors) + log_jacobian;
  return std::isnan(total) ? kNegInf : total;
}

void MhConfig::validate() const {
  if (steps <= burn_in) throw InputError("MH steps must exceed burn_in");
  if (chains < 1) throw InputError("MH needs at least one chain");
  for (const double s : proposal_scales) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InputError("proposal scales must be positive");
  }
}

MhChain metropolis_chain(const std::function<double(const Eigen::VectorXd&)>& log_density, Eigen::VectorXd start,
                         Eigen::VectorXd scales, std::size_t steps, std::size_t burn_in, bool adapt,
                         std::uint64_t seed, std::uint64_t stream) {
  if (steps <= burn_in) throw InputError("MH steps must exceed burn_in");
  if (scales.size() != start.size()) throw InputError("one proposal scale per coordinate is required");
  constexpr std::size_t kAdaptWindow = 50;

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  Eigen::VectorXd current = std::move(start);
  double current_lp = log_density(current);
  if (!std::isfinite(current_lp)) throw InputError("MH start point has zero target density");

  MhChain chain;
  const std::size_t kept = steps - burn_in;
  chain.states.reserve(kept);
  chain.log_density.reserve(kept);
  chain.accepted.reserve(kept);
  std::size_t window_accepts = 0;
  std::size_t kept_accepts = 0;
  Eigen::VectorXd proposal(current.size());
  for (std::size_t step = 0; step < steps; ++step) {
    for (Eigen::Index i = 0; i < proposal.size(); ++i) proposal[i] = current[i] + scales[i] * normal(rng);
    const double proposal_lp = log_density(proposal);
    const double log_u = std::log(uniform(rng));
    const bool accept = log_u < proposal_lp - current_lp;
    if (accept) {
      current = proposal;
      current_lp = proposal_lp;
    }
    if (step < burn_in) {
      window_accepts += accept ? 1 : 0;
      if (adapt && (step + 1) % kAdaptWindow == 0) {
        const double rate = static_cast<double>(window_accepts) / kAdaptWindow;
        if (rate < 0.2) scales *= 0.7;
        else if (rate > 0.5) scales *= 1.3;
        window_accepts = 0;
      }
      continue;
    }
    kept_accepts += accept ? 1 : 0;
    chain.states.push_back(current);
    chain.log_density.push_back(current_lp);
    chain.accepted.push_back(accept ? 1 : 0);
  }
  chain.acceptance_rate = static_cast<double>(kept_accepts) / static_cast<double>(kept);
  chain.final_scales = std::move(scales);
  return chain;
}

std::vector<Hyperparams<>> PosteriorSamples::pooled() const {
  std::vector<Hyperparams<>> out;
  for (const auto& c : chains) out.insert(out.end(), c.draws.begin(), c.draws.end());
  return out;
}

Hyperparams<> initial_hyperparams(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  std::vector<double> dists;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = i + 1; j < x.rows(); ++j) {
      const double d = (x.row(i) - x.row(j)).norm();
      if (d > 0.0) dists.push_back(d);
    }
  Hyperparams<> hp;
  if (!dists.empty()) {
    std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2), dists.end());
    hp.lengthscale = dists[dists.size() / 2];
  }
  const double var = y.size() > 0 ? (y.array() - y.mean()).square().mean() : 0.0;
  hp.signal_var = std::max(var, 1e-6);
  hp.noise_var = 0.1 * hp.signal_var;
  return hp;
}

PosteriorSamples mh_sample(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const HyperPriors& priors,
                           const MhConfig& cfg) {
  cfg.validate();
  if (x.rows() == 0 || x.rows() != y.size()) throw InputError("MH needs matching, non-empty training data");
  const Eigen::Vector3d center = to_log_params(initial_hyperparams(x, y));
  const Eigen::Vector3d scales(cfg.proposal_scales[0], cfg.proposal_scales[1], cfg.proposal_scales[2]);
  auto target = [&](const Eigen::VectorXd& eta) {
    return log_posterior(x, y, from_log_params(eta), priors);
  };

  PosteriorSamples out;
  out.burn_in = cfg.burn_in;
  out.chains.resize(cfg.chains);
  parallel_for(cfg.chains, [&](std::size_t c) {
    // Dispersed start drawn from a stream no chain uses for its moves.
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(c), 0x5eedu};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 0.5);
    Eigen::VectorXd start = center;
    for (int attempt = 0; attempt < 100; ++attempt) {
      for (Eigen::Index i = 0; i < start.size(); ++i) start[i] = center[i] + normal(rng);
      if (std::isfinite(target(start))) break;
      start = center;
    }
    const auto chain = metropolis_chain(target, start, scales, cfg.steps, cfg.burn_in, cfg.adapt, cfg.seed, c);
    auto& dst = out.chains[c];
    dst.draws.reserve(chain.states.size());
    for (const auto& s : chain.states) dst.draws.push_back(from_log_params(s));
    dst.log_posterior = chain.log_density;
    dst.accepted = chain.accepted;
    dst.acceptance_rate = chain.acceptance_rate;
  });
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Hyperparams<>> thin_draws(const std::vector<Hyperparams<>>& draws, std::size_t subsample) {
  if (subsample == 0 || subsample >= draws.size()) return draws;
  std::vector<Hyperparams<>> out;
  out.reserve(subsample);
  for (std::size_t i = 0; i < subsample; ++i) out.push_back(draws[i * draws.size() / subsample]);
  return out;
}

MixturePrediction predictive_mixture(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     const std::vector<Hyperparams<>>& draws, const Eigen::MatrixXd& xstar) {
  std::vector<std::optional<Prediction<>>> per_draw(draws.size());
  parallel_for(draws.size(), [&](std::size_t i) {
    try {
      per_draw[i] = GpModel::fit(x, y, draws[i]).predict(xstar, false);
    } catch (const NumericalError&) {
    }
  });
  MixturePrediction out;
  out.mean = Eigen::VectorXd::Zero(xstar.rows());
  Eigen::VectorXd within = Eigen::VectorXd::Zero(xstar.rows());
  for (const auto& p : per_draw) {
    if (!p) continue;
    out.mean += p->mean;
    within += p->variance;
    ++out.draws_used;
  }
  if (out.draws_used == 0) throw NumericalError("no posterior draw produced a usable GP fit");
  const double count = static_cast<double>(out.draws_used);
  out.mean /= count;
  Eigen::VectorXd between = Eigen::VectorXd::Zero(xstar.rows());
  for (const auto& p : per_draw)
    if (p) between += (p->mean - out.mean).cwiseAbs2();
  out.variance = (within + between) / count;
  return out;
}

MixturePrediction predictive_mixture(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     const PosteriorSamples& samples, const Eigen::MatrixXd& xstar,
                                     std::size_t subsample) {
  return predictive_mixture(x, y, thin_draws(samples.pooled(), subsample), xstar);
}

void write_samples_csv(std::ostream& out, const PosteriorSamples& samples) {
  out << "chain,step,lengthscale,signal_var,noise_var,log_posterior,accepted\n";
  for (std::size_t c = 0; c < samples.chains.size(); ++c) {
    const auto& chain = samples.chains[c];
    for (std::size_t i = 0; i < chain.draws.size(); ++i) {
      const auto& hp = chain.draws[i];
      out << c << ',' << samples.burn_in + i << ',' << format_real(hp.lengthscale) << ','
          << format_real(hp.signal_var) << ',' << format_real(hp.noise_var) << ','
          << format_real(chain.log_posterior[i]) << ',' << int(chain.accepted[i]) << '\n';
    }
  }
}

}  // namespace conducta
