#include "conducta/conductance.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "conducta/error.hpp"
#include "conducta/io.hpp"

namespace conducta {

namespace {

std::vector<char> membership(Eigen::Index n, std::span<const VertexId> s) {
  std::vector<char> mask(static_cast<std::size_t>(n), 0);
  for (const VertexId v : s) {
    if (static_cast<Eigen::Index>(v) >= n) throw InputError("vertex " + std::to_string(v) + " out of range");
    mask[v] = 1;
  }
  return mask;
}

void check_budget(double budget) {
  if (!(budget > 0.0 && budget <= 1.0)) throw InputError("mass budget must lie in (0, 1]");
}

void check_center(const RandomWalk& walk, const Eigen::VectorXd& dists, VertexId center) {
  if (static_cast<Eigen::Index>(center) >= walk.size()) {
    throw InputError("center vertex " + std::to_string(center) + " out of range");
  }
  if (dists.size() != walk.size()) throw InputError("distance vector does not match the walk size");
  if (dists[static_cast<Eigen::Index>(center)] != 0.0) throw InputError("distances must be measured from the center");
}

}  // namespace

double ergodic_flow(const RandomWalk& walk, std::span<const VertexId> s1, std::span<const VertexId> s2) {
  const auto in1 = membership(walk.size(), s1);
  const auto in2 = membership(walk.size(), s2);
  for (std::size_t v = 0; v < in1.size(); ++v) {
    if (in1[v] && in2[v]) throw InputError("ergodic_flow needs disjoint sets (vertex " + std::to_string(v) + ")");
  }
  const auto& p = walk.transition();
  const auto& pi = walk.stationary();
  double flow = 0.0;
  for (const VertexId i : s1) {
    const auto row = static_cast<Eigen::Index>(i);
    for (RandomWalk::Transition::InnerIterator it(p, row); it; ++it) {
      if (in2[static_cast<std::size_t>(it.col())]) flow += pi[row] * it.value();
    }
  }
  return flow;
}

CutStats set_conductance(const RandomWalk& walk, std::span<const VertexId> s) {
  const auto in = membership(walk.size(), s);
  const auto members = static_cast<std::size_t>(std::count(in.begin(), in.end(), 1));
  if (members == 0 || members == in.size()) throw InputError("conductance needs a nonempty proper subset");
  const auto& p = walk.transition();
  const auto& pi = walk.stationary();
  CutStats stats;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (!in[i]) continue;
    const auto row = static_cast<Eigen::Index>(i);
    stats.pi_mass += pi[row];
    for (RandomWalk::Transition::InnerIterator it(p, row); it; ++it) {
      if (!in[static_cast<std::size_t>(it.col())]) stats.flow += pi[row] * it.value();
    }
  }
  stats.conductance = stats.flow / stats.pi_mass;
  return stats;
}

ChainConductance chain_conductance_exact(const RandomWalk& walk, double budget) {
  check_budget(budget);
  const auto n = static_cast<std::size_t>(walk.size());
  if (n > kMaxEnumerationVertices) {
    throw InputError("exhaustive conductance is limited to " + std::to_string(kMaxEnumerationVertices) +
                     " vertices (graph has " + std::to_string(n) + ")");
  }
  if (n < 2) throw InputError("chain conductance needs at least two vertices");

  const Eigen::MatrixXd q = walk.stationary().asDiagonal() * Eigen::MatrixXd(walk.transition());
  const auto& pi = walk.stationary();

  // Gray-code walk over all 2^n subsets: step k flips bit ctz(k).
  std::vector<char> in(n, 0);
  double flow = 0.0;
  double mass = 0.0;
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t best_mask = 0;
  std::uint32_t mask = 0;
  const std::uint32_t total = std::uint32_t{1} << n;
  for (std::uint32_t k = 1; k < total; ++k) {
    const auto v = static_cast<std::size_t>(std::countr_zero(k));
    const auto vi = static_cast<Eigen::Index>(v);
    double to_members = 0.0;
    double to_others = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == v) continue;
      (in[j] ? to_members : to_others) += q(vi, static_cast<Eigen::Index>(j));
    }
    if (in[v]) {
      in[v] = 0;
      mass -= pi[vi];
      flow += to_members - to_others;
    } else {
      in[v] = 1;
      mass += pi[vi];
      flow += to_others - to_members;
    }
    mask ^= std::uint32_t{1} << v;
    if (mask == total - 1 || !within_budget(mass, budget)) continue;
    const double phi = std::max(flow, 0.0) / mass;
    if (phi < best) {
      best = phi;
      best_mask = mask;
    }
  }
  if (best_mask == 0) throw InputError("no subset satisfies the mass budget");

  ChainConductance out;
  for (std::size_t v = 0; v < n; ++v)
    if (best_mask & (std::uint32_t{1} << v)) out.argmin.push_back(v);
  // Re-evaluate the winner directly so accumulated rounding does not leak out.
  out.value = set_conductance(walk, out.argmin).conductance;
  return out;
}

// ---------------------------------------------------------------------------

double median_radius(const Eigen::VectorXd& dists, VertexId center) {
  std::vector<double> others;
  others.reserve(static_cast<std::size_t>(dists.size()));
  for (Eigen::Index i = 0; i < dists.size(); ++i) {
    if (static_cast<VertexId>(i) != center && std::isfinite(dists[i])) others.push_back(dists[i]);
  }
  if (others.empty()) return 0.0;
  std::sort(others.begin(), others.end());
  const std::size_t m = others.size();
  return m % 2 == 1 ? others[m / 2] : 0.5 * (others[m / 2 - 1] + others[m / 2]);
}

std::vector<VertexId> ball_members(const Eigen::VectorXd& dists, double radius) {
  std::vector<VertexId> out;
  for (Eigen::Index i = 0; i < dists.size(); ++i)
    if (dists[i] <= radius) out.push_back(static_cast<VertexId>(i));
  return out;
}

namespace {

std::vector<VertexId> distance_order(const Eigen::VectorXd& dists) {
  std::vector<VertexId> order;
  for (Eigen::Index i = 0; i < dists.size(); ++i)
    if (std::isfinite(dists[i])) order.push_back(static_cast<VertexId>(i));
  std::sort(order.begin(), order.end(), [&](VertexId a, VertexId b) {
    const double da = dists[static_cast<Eigen::Index>(a)];
    const double db = dists[static_cast<Eigen::Index>(b)];
    return da < db || (da == db && a < b);
  });
  return order;
}

void record_shell(InducedConductance& result, BallShell shell, std::size_t n, double max_radius, double budget) {
  const bool proper = shell.size < n;
  if (!proper) shell.stats.conductance = 0.0;
  shell.feasible = proper && shell.radius <= max_radius && within_budget(shell.stats.pi_mass, budget);
  if (shell.feasible && (!result.best || shell.stats.conductance < result.best->value - kTieTolerance)) {
    result.best = BallMinimum{shell.stats.conductance, shell.radius, shell.size};
  }
  result.profile.shells.push_back(shell);
}

}  // namespace

InducedConductance induced_conductance(const RandomWalk& walk, const Eigen::VectorXd& dists, VertexId center,
                                       double max_radius, double budget) {
  check_budget(budget);
  check_center(walk, dists, center);
  const auto n = static_cast<std::size_t>(walk.size());
  const auto& p = walk.transition();
  const auto& pi = walk.stationary();

  InducedConductance result;
  result.profile.center = center;
  const auto order = distance_order(dists);
  std::vector<char> in(n, 0);
  double flow = 0.0;
  double mass = 0.0;
  std::size_t pos = 0;
  while (pos < order.size()) {
    const double radius = dists[static_cast<Eigen::Index>(order[pos])];
    // Add the whole shell at this distance. Reversibility lets the inflow
    // pi_j p_jv from members be written as pi_v p_vj.
    for (; pos < order.size() && dists[static_cast<Eigen::Index>(order[pos])] == radius; ++pos) {
      const auto v = static_cast<Eigen::Index>(order[pos]);
      in[order[pos]] = 1;
      mass += pi[v];
      for (RandomWalk::Transition::InnerIterator it(p, v); it; ++it) {
        const double q = pi[v] * it.value();
        flow += in[static_cast<std::size_t>(it.col())] ? -q : q;
      }
    }
    BallShell shell;
    shell.radius = radius;
    shell.size = pos;
    shell.stats.flow = std::max(flow, 0.0);
    shell.stats.pi_mass = mass;
    shell.stats.conductance = shell.stats.flow / mass;
    record_shell(result, shell, n, max_radius, budget);
  }
  return result;
}

InducedConductance induced_conductance_oracle(const RandomWalk& walk, const Eigen::VectorXd& dists,
                                              VertexId center, double max_radius, double budget) {
  check_budget(budget);
  check_center(walk, dists, center);
  const auto n = static_cast<std::size_t>(walk.size());

  std::vector<double> radii;
  for (Eigen::Index i = 0; i < dists.size(); ++i)
    if (std::isfinite(dists[i])) radii.push_back(dists[i]);
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

  InducedConductance result;
  result.profile.center = center;
  for (const double z : radii) {
    const auto members = ball_members(dists, z);
    BallShell shell;
    shell.radius = z;
    shell.size = members.size();
    if (members.size() < n) {
      shell.stats = set_conductance(walk, members);
    } else {
      shell.stats.pi_mass = walk.stationary().sum();
    }
    record_shell(result, shell, n, max_radius, budget);
  }
  return result;
}

void write_ball_profile_header(std::ostream& out) { out << "center,radius,pi_mass,flow,conductance,feasible\n"; }

void write_ball_profile_rows(std::ostream& out, const BallProfile& profile) {
  for (const auto& s : profile.shells) {
    out << profile.center << ',' << format_real(s.radius) << ',' << format_real(s.stats.pi_mass) << ','
        << format_real(s.stats.flow) << ',' << format_real(s.stats.conductance) << ','
        << (s.feasible ? "feasible" : "infeasible") << '\n';
  }
}

}  // namespace conducta
