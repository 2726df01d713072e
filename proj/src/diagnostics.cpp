#include <algorithm>
#include <cmath>
#include <numeric>

#include "conducta/mcmc.hpp"

namespace conducta {

namespace {

double mean_of(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  return std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(begin), v.begin() + static_cast<std::ptrdiff_t>(end),
                         0.0) /
         static_cast<double>(end - begin);
}

// Single-chain ESS; empty on zero variance.
std::optional<double> chain_ess(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  const double m = mean_of(x, 0, n);
  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - m) * (x[i + lag] - m);
    return s / static_cast<double>(n);
  };
  const double c0 = autocov(0);
  if (!(c0 > 0.0)) return std::nullopt;

  double pair_sum = 0.0;
  for (std::size_t k = 0; 2 * k < n; ++k) {
    const double rho_even = autocov(2 * k) / c0;
    const double rho_odd = 2 * k + 1 < n ? autocov(2 * k + 1) / c0 : 0.0;
    const double gamma = rho_even + rho_odd;
    if (k > 0 && gamma <= 0.0) break;
    pair_sum += gamma;
  }
  const double tau = std::max(-1.0 + 2.0 * pair_sum, 1.0 / static_cast<double>(n));
  return static_cast<double>(n) / tau;
}

}  // namespace

std::optional<double> effective_sample_size(const std::vector<std::vector<double>>& chains) {
  if (chains.empty()) return std::nullopt;
  double total = 0.0;
  for (const auto& c : chains) {
    const auto e = chain_ess(c);
    if (!e) return std::nullopt;
    total += *e;
  }
  return total;
}

std::optional<double> split_rhat(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) return std::nullopt;
  std::size_t length = chains.front().size();
  for (const auto& c : chains) length = std::min(length, c.size());
  const std::size_t half = length / 2;
  if (half < 2) return std::nullopt;

  std::vector<double> means;
  std::vector<double> vars;
  for (const auto& c : chains) {
    for (const std::size_t begin : {std::size_t{0}, length - half}) {
      const double m = mean_of(c, begin, begin + half);
      double ss = 0.0;
      for (std::size_t i = begin; i < begin + half; ++i) ss += (c[i] - m) * (c[i] - m);
      means.push_back(m);
      vars.push_back(ss / static_cast<double>(half - 1));
    }
  }
  const double seqs = static_cast<double>(means.size());
  const double l = static_cast<double>(half);
  const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / seqs;
  if (!(w > 0.0)) return std::nullopt;
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / seqs;
  double b = 0.0;
  for (const double m : means) b += (m - grand) * (m - grand);
  b *= l / (seqs - 1.0);
  const double var_plus = (l - 1.0) / l * w + b / l;
  return std::sqrt(var_plus / w);
}

Diagnostics diagnostics(const PosteriorSamples& samples) {
  Diagnostics out;
  for (int p = 0; p < 3; ++p) {
    std::vector<std::vector<double>> series;
    for (const auto& chain : samples.chains) {
      auto& s = series.emplace_back();
      s.reserve(chain.draws.size());
      for (const auto& hp : chain.draws) s.push_back(to_log_params(hp)[p]);
    }
    out.ess[static_cast<std::size_t>(p)] = effective_sample_size(series);
    out.rhat[static_cast<std::size_t>(p)] = split_rhat(series);
  }
  for (const auto& chain : samples.chains) out.acceptance.push_back(chain.acceptance_rate);
  return out;
}

}  // namespace conducta
