#include <gtest/gtest.h>

#include <numeric>

#include "conducta/mcmc.hpp"
#include "support.hpp"

using namespace conducta;
using namespace conducta::testing;

namespace {

double midpoint(const std::function<double(double)>& f, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += f(lo + (i + 0.5) * h);
  return s * h;
}

std::vector<double> ar1(std::uint64_t seed, std::size_t n, double rho) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> out(n);
  double x = normal(rng);
  for (auto& v : out) {
    x = rho * x + std::sqrt(1.0 - rho * rho) * normal(rng);
    v = x;
  }
  return out;
}

// log N(y|0,K+sn2 I) + gamma log densities at the precisions + log Jacobians,
// written out from scratch.
double oracle_log_posterior(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double ell, double sf2, double sn2,
                            double a, double w) {
  Eigen::MatrixXd c = oracle_kernel(x, x, ell, sf2);
  c.diagonal().array() += sn2;
  auto gamma_log = [&](double phi) {
    return (a / 2) * std::log(a / (2 * w)) - std::lgamma(a / 2) + (a / 2 - 1) * std::log(phi) - phi * a / (2 * w);
  };
  const double prior = gamma_log(1 / (ell * ell)) + gamma_log(1 / sf2) + gamma_log(1 / sn2);
  const double jac = std::log(2 / (ell * ell)) + std::log(1 / sf2) + std::log(1 / sn2);
  return oracle_log_gaussian(y, c) + prior + jac;
}

struct Data {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

Data small_data(std::uint64_t seed, int n = 15) {
  Data d;
  synthetic_gp_data(seed, n, 1.0, 1.0, 0.05, d.x, d.y);
  return d;
}

}  // namespace

TEST(GammaPrior, Examples) {
  const GammaPrecisionPrior p{2.0, 1.0};
  EXPECT_NEAR(p.log_density(1.0), -1.0, 1e-15);
  EXPECT_EQ(p.log_density(0.0), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(p.log_density(-1.0), -std::numeric_limits<double>::infinity());
  const GammaPrecisionPrior sharp{4.0, 1.0};
  EXPECT_LT(sharp.log_density(1e-12), -20.0);
  EXPECT_THROW((GammaPrecisionPrior{0.0, 1.0}.validate()), InputError);
  EXPECT_THROW((GammaPrecisionPrior{1.0, -1.0}.validate()), InputError);
}

TEST(GammaPrior, IntegratesToOneWithMeanOmega) {
  for (const double a : {1.0, 2.0, 4.0})
    for (const double w : {0.5, 1.0, 2.0}) {
      const GammaPrecisionPrior p{a, w};
      // Substitute phi = t^2 so the a = 1 singularity at 0 becomes integrable.
      const auto mass = [&](double t) { return 2.0 * t * p.density(t * t); };
      const auto first = [&](double t) { return 2.0 * t * t * t * p.density(t * t); };
      EXPECT_NEAR(midpoint(mass, 0.0, 12.0, 400000), 1.0, 1e-6) << a << " " << w;
      EXPECT_NEAR(midpoint(first, 0.0, 12.0, 400000), w, 1e-6) << a << " " << w;
    }
}

TEST(LogPosterior, MatchesOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = small_data(seed);
    const double ell = 0.5 + 0.2 * seed, sf2 = 0.7 + 0.1 * seed, sn2 = 0.01 + 0.02 * seed;
    const HyperPriors priors{GammaPrecisionPrior{2.0, 1.5}, GammaPrecisionPrior{2.0, 1.5},
                             GammaPrecisionPrior{2.0, 1.5}};
    EXPECT_NEAR(log_posterior(d.x, d.y, {ell, sf2, sn2}, priors),
                oracle_log_posterior(d.x, d.y, ell, sf2, sn2, 2.0, 1.5), 1e-8);
  }
}

TEST(LogPosterior, FlatPriorDifferencesAreLikelihoodDifferences) {
  const auto d = small_data(3);
  const Hyperparams<> a{0.8, 1.2, 0.05}, b{1.4, 0.6, 0.2};
  const double lml_a = GpModel::fit(d.x, d.y, a).log_marginal_likelihood();
  const double lml_b = GpModel::fit(d.x, d.y, b).log_marginal_likelihood();
  const auto flat = HyperPriors::flat();
  EXPECT_NEAR(log_posterior(d.x, d.y, a, flat) - log_posterior(d.x, d.y, b, flat), lml_a - lml_b, 1e-10);
}

TEST(LogPosterior, OutsideSupportIsNegativeInfinity) {
  const auto d = small_data(4);
  const double ninf = -std::numeric_limits<double>::infinity();
  EXPECT_EQ(log_posterior(d.x, d.y, {-1.0, 1.0, 0.1}, {}), ninf);
  EXPECT_EQ(log_posterior(d.x, d.y, {1.0, 0.0, 0.1}, {}), ninf);
  EXPECT_EQ(log_posterior(d.x, d.y, {1.0, 1.0, 0.0}, {}), ninf);
  EXPECT_THROW(log_prior({1.0, 1.0, 0.0}, {}), InputError);
}

TEST(LogPosterior, InvariantUnderPermutation) {
  const auto d = small_data(5, 20);
  std::vector<int> perm(20);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(9);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd xp(20, 2);
  Eigen::VectorXd yp(20);
  for (int i = 0; i < 20; ++i) {
    xp.row(i) = d.x.row(perm[i]);
    yp[i] = d.y[perm[i]];
  }
  const Hyperparams<> hp{0.9, 1.1, 0.07};
  EXPECT_NEAR(log_posterior(d.x, d.y, hp, {}), log_posterior(xp, yp, hp, {}), 1e-10);
}

TEST(LogParams, RoundTrip) {
  const Hyperparams<> hp{0.3, 2.0, 1e-3};
  const auto back = from_log_params(to_log_params(hp));
  EXPECT_NEAR(back.lengthscale, hp.lengthscale, 1e-15);
  EXPECT_NEAR(back.signal_var, hp.signal_var, 1e-15);
  EXPECT_NEAR(back.noise_var, hp.noise_var, 1e-18);
}

TEST(Metropolis, FlatTargetAcceptsEverything) {
  const auto chain = metropolis_chain([](const Eigen::VectorXd&) { return 0.0; }, Eigen::VectorXd::Zero(2),
                                      Eigen::VectorXd::Ones(2), 300, 100, false, 1, 0);
  EXPECT_EQ(chain.states.size(), 200u);
  EXPECT_DOUBLE_EQ(chain.acceptance_rate, 1.0);
}

TEST(Metropolis, StepsMustExceedBurnIn) {
  const auto flat = [](const Eigen::VectorXd&) { return 0.0; };
  EXPECT_THROW(metropolis_chain(flat, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), 100, 100, true, 0, 0),
               InputError);
  MhConfig cfg;
  cfg.steps = 10;
  cfg.burn_in = 20;
  EXPECT_THROW(cfg.validate(), InputError);
}

TEST(Metropolis, RejectsStartWithZeroDensity) {
  const auto target = [](const Eigen::VectorXd& v) {
    return v[0] > 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  };
  EXPECT_THROW(metropolis_chain(target, Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Ones(1), 10, 5, false,
                                0, 0),
               InputError);
}

TEST(Metropolis, DeterministicPerSeedAndStream) {
  const auto target = [](const Eigen::VectorXd& v) { return -0.5 * v.squaredNorm(); };
  const auto a = metropolis_chain(target, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2), 500, 100, true, 7, 0);
  const auto b = metropolis_chain(target, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2), 500, 100, true, 7, 0);
  const auto c = metropolis_chain(target, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2), 500, 100, true, 7, 1);
  ASSERT_EQ(a.states.size(), b.states.size());
  for (std::size_t i = 0; i < a.states.size(); ++i) EXPECT_EQ(a.states[i], b.states[i]);
  bool differs = false;
  for (std::size_t i = 0; i < a.states.size(); ++i) differs |= a.states[i] != c.states[i];
  EXPECT_TRUE(differs);
}

TEST(Metropolis, AdaptationLeavesTargetInvariant) {
  const auto target = [](const Eigen::VectorXd& v) { return -0.5 * v.squaredNorm(); };
  const auto chain =
      metropolis_chain(target, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 20.0), 40000, 2000, true, 3, 0);
  EXPECT_LT(chain.final_scales[0], 20.0);
  std::vector<double> xs;
  for (const auto& s : chain.states) xs.push_back(s[0]);
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double var = 0.0;
  for (const double v : xs) var += (v - mean) * (v - mean);
  var /= xs.size();
  const double ess = *effective_sample_size({xs});
  EXPECT_NEAR(mean, 0.0, 4.0 / std::sqrt(ess));
  EXPECT_NEAR(var, 1.0, 4.0 * std::sqrt(2.0 / ess));
}

TEST(MhSample, ChainsAreDeterministicAndIndependent) {
  const auto d = small_data(6, 20);
  MhConfig cfg;
  cfg.steps = 600;
  cfg.burn_in = 100;
  cfg.chains = 2;
  cfg.seed = 11;
  const auto a = mh_sample(d.x, d.y, {}, cfg);
  const auto b = mh_sample(d.x, d.y, {}, cfg);
  ASSERT_EQ(a.chains.size(), 2u);
  ASSERT_EQ(a.chains[0].draws.size(), 500u);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < 500; ++i) {
      EXPECT_EQ(a.chains[c].draws[i].lengthscale, b.chains[c].draws[i].lengthscale);
      EXPECT_EQ(a.chains[c].log_posterior[i], b.chains[c].log_posterior[i]);
    }
  // Lag-0 correlation between chain increments.
  std::vector<double> da, db;
  for (std::size_t i = 1; i < 500; ++i) {
    da.push_back(std::log(a.chains[0].draws[i].lengthscale) - std::log(a.chains[0].draws[i - 1].lengthscale));
    db.push_back(std::log(a.chains[1].draws[i].lengthscale) - std::log(a.chains[1].draws[i - 1].lengthscale));
  }
  const double ma = std::accumulate(da.begin(), da.end(), 0.0) / da.size();
  const double mb = std::accumulate(db.begin(), db.end(), 0.0) / db.size();
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    sab += (da[i] - ma) * (db[i] - mb);
    saa += (da[i] - ma) * (da[i] - ma);
    sbb += (db[i] - mb) * (db[i] - mb);
  }
  EXPECT_LT(std::abs(sab / std::sqrt(saa * sbb)), 0.1);
  for (const auto& chain : a.chains)
    for (const auto& hp : chain.draws) EXPECT_TRUE(hp.valid() && hp.noise_var > 0);
}

TEST(EffectiveSampleSize, IidCloseToDrawCount) {
  const auto xs = ar1(1, 4000, 0.0);
  const double ess = *effective_sample_size({xs});
  EXPECT_NEAR(ess, 4000.0, 800.0);
}

TEST(EffectiveSampleSize, CorrelatedChainIsSmaller) {
  const auto xs = ar1(2, 4000, 0.9);
  // Asymptotic value n (1 - rho) / (1 + rho).
  EXPECT_NEAR(*effective_sample_size({xs}), 4000.0 * 0.1 / 1.9, 100.0);
}

TEST(EffectiveSampleSize, AntithetricChainExceedsDrawCount) {
  std::vector<double> xs;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int i = 0; i < 2000; ++i) {
    const double z = normal(rng);
    xs.push_back(z);
    xs.push_back(-z + 0.1 * normal(rng));
  }
  EXPECT_GT(*effective_sample_size({xs}), 4000.0);
}

TEST(EffectiveSampleSize, ConstantChainIsAbsent) {
  EXPECT_FALSE(effective_sample_size({std::vector<double>(100, 1.5)}).has_value());
}

TEST(SplitRhat, Examples) {
  EXPECT_FALSE(split_rhat({ar1(4, 1000, 0.0)}).has_value());
  EXPECT_FALSE(split_rhat({std::vector<double>(50, 1.0), std::vector<double>(50, 1.0)}).has_value());
  const double mixed = *split_rhat({ar1(5, 2000, 0.3), ar1(6, 2000, 0.3), ar1(7, 2000, 0.3)});
  EXPECT_LT(mixed, 1.01);
  auto shifted = ar1(8, 2000, 0.3);
  for (auto& v : shifted) v += 5.0;
  EXPECT_GT(*split_rhat({ar1(9, 2000, 0.3), shifted}), 1.5);
}

TEST(Diagnostics, SingleChainOmitsRhat) {
  const auto d = small_data(7);
  MhConfig cfg;
  cfg.steps = 400;
  cfg.burn_in = 100;
  cfg.chains = 1;
  const auto diag = diagnostics(mh_sample(d.x, d.y, {}, cfg));
  for (const auto& r : diag.rhat) EXPECT_FALSE(r.has_value());
  EXPECT_EQ(diag.acceptance.size(), 1u);
}

TEST(Mixture, SingleDrawEqualsPredict) {
  const auto d = small_data(8);
  const Hyperparams<> hp{0.9, 1.3, 0.04};
  Eigen::MatrixXd xs(5, 2);
  xs.setRandom();
  const auto mix = predictive_mixture(d.x, d.y, std::vector<Hyperparams<>>{hp}, xs);
  const auto p = GpModel::fit(d.x, d.y, hp).predict(xs);
  EXPECT_EQ(mix.draws_used, 1u);
  EXPECT_LE((mix.mean - p.mean).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((mix.variance - p.variance).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Mixture, LawOfTotalVarianceAgainstOracle) {
  const auto d = small_data(9);
  std::vector<Hyperparams<>> draws{{0.5, 1.0, 0.02}, {1.0, 2.0, 0.1}, {2.0, 0.5, 0.05}, {0.8, 1.1, 0.3}};
  Eigen::MatrixXd xs(6, 2);
  xs.setRandom();
  xs *= 3.0;
  const auto mix = predictive_mixture(d.x, d.y, draws, xs);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(6), second = Eigen::VectorXd::Zero(6);
  for (const auto& hp : draws) {
    Eigen::MatrixXd c = oracle_kernel(d.x, d.x, hp.lengthscale, hp.signal_var);
    c.diagonal().array() += hp.noise_var;
    const Eigen::MatrixXd cinv = c.inverse();
    const Eigen::MatrixXd ks = oracle_kernel(d.x, xs, hp.lengthscale, hp.signal_var);
    const Eigen::VectorXd mu = ks.transpose() * cinv * d.y;
    const Eigen::VectorXd var =
        (Eigen::VectorXd::Constant(6, hp.signal_var) - (ks.transpose() * cinv * ks).diagonal()).cwiseMax(0.0);
    m += mu / 4.0;
    second += (var + mu.cwiseProduct(mu)) / 4.0;
  }
  EXPECT_LE((mix.mean - m).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE((mix.variance - (second - m.cwiseProduct(m))).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_GE(mix.variance.minCoeff(), 0.0);
}

TEST(Mixture, ThinningIsEvenAndBounded) {
  std::vector<Hyperparams<>> draws;
  for (int i = 0; i < 100; ++i) draws.push_back({1.0 + i, 1.0, 0.1});
  const auto thin = thin_draws(draws, 10);
  EXPECT_EQ(thin.size(), 10u);
  EXPECT_EQ(thin_draws(draws, 500).size(), 100u);
  EXPECT_EQ(thin.front().lengthscale, 1.0);
}

TEST(Acceptance, LargeLogRatiosAreHandledExactly) {
  // A 700-nat drop must always be rejected; once a chain enters the high
  // region it never leaves it.
  const auto target = [](const Eigen::VectorXd& v) { return v[0] > 0 ? 0.0 : -700.0; };
  const auto chain = metropolis_chain(target, Eigen::VectorXd::Constant(1, -0.5), Eigen::VectorXd::Constant(1, 5.0),
                                      2000, 0, false, 1, 0);
  std::size_t first_positive = chain.states.size();
  for (std::size_t i = 0; i < chain.states.size(); ++i)
    if (chain.states[i][0] > 0.0) {
      first_positive = i;
      break;
    }
  ASSERT_LT(first_positive, 50u);
  for (std::size_t i = first_positive; i < chain.states.size(); ++i) EXPECT_GT(chain.states[i][0], 0.0);
}

TEST(SamplesCsv, HeaderAndRowCount) {
  const auto d = small_data(10);
  MhConfig cfg;
  cfg.steps = 120;
  cfg.burn_in = 20;
  cfg.chains = 2;
  std::ostringstream out;
  write_samples_csv(out, mh_sample(d.x, d.y, {}, cfg));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "chain,step,lengthscale,signal_var,noise_var,log_posterior,accepted");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 200u);
}
