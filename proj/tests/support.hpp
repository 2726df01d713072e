#pragma once

// Fixtures and independent oracles. Oracles work from the edge list directly
// (Floyd-Warshall distances, edge-sum flows, dense inverses) and never call
// the library code they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "conducta/graph.hpp"

namespace conducta::testing {

inline WeightedGraph path3() { return WeightedGraph(3, {{0, 1, 1.0}, {1, 2, 1.0}}); }

inline WeightedGraph cycle4() { return WeightedGraph(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 0, 1.0}}); }

inline WeightedGraph triangle() { return WeightedGraph(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}}); }

/// {0,1,2} and {3,4,5} joined by (2,3), unit weights.
inline WeightedGraph two_triangles() {
  return WeightedGraph(6, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}, {3, 4, 1.0}, {4, 5, 1.0}, {3, 5, 1.0}, {2, 3, 1.0}});
}

inline WeightedGraph clique(std::size_t k) {
  std::vector<Edge> edges;
  for (VertexId i = 0; i < k; ++i)
    for (VertexId j = i + 1; j < k; ++j) edges.push_back({i, j, 1.0});
  return WeightedGraph(k, edges);
}

/// Two k-cliques {0..k-1}, {k..2k-1} joined by the edge (k-1, k).
inline WeightedGraph two_cliques(std::size_t k) {
  std::vector<Edge> edges;
  for (std::size_t base : {std::size_t{0}, k})
    for (VertexId i = 0; i < k; ++i)
      for (VertexId j = i + 1; j < k; ++j) edges.push_back({base + i, base + j, 1.0});
  edges.push_back({k - 1, k, 1.0});
  return WeightedGraph(2 * k, edges);
}

/// Connected graph: random spanning tree plus extra edges. With
/// integer_weights the weights are small integers, which produces many
/// equal-distance ties.
inline WeightedGraph random_connected_graph(std::mt19937_64& rng, std::size_t n, double extra_edge_prob,
                                            bool integer_weights = false) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> small(1, 3);
  auto weight = [&] { return integer_weights ? static_cast<double>(small(rng)) : 0.1 + 4.9 * unit(rng); };
  std::set<std::pair<VertexId, VertexId>> seen;
  std::vector<Edge> edges;
  auto add = [&](VertexId a, VertexId b) {
    if (a == b) return;
    const auto key = std::minmax(a, b);
    if (!seen.insert({key.first, key.second}).second) return;
    edges.push_back({a, b, weight()});
  };
  std::vector<VertexId> order(n);
  for (VertexId i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    add(order[i], order[pick(rng)]);
  }
  for (VertexId i = 0; i < n; ++i)
    for (VertexId j = i + 1; j < n; ++j)
      if (unit(rng) < extra_edge_prob) add(i, j);
  return WeightedGraph(n, edges);
}

// ---------------------------------------------------------------------------
// Graph oracles

inline Eigen::MatrixXd floyd_warshall(const WeightedGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_vertices());
  Eigen::MatrixXd d = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < n; ++i) d(i, i) = 0.0;
  for (const auto& e : g.edges()) {
    d(e.u, e.v) = std::min(d(e.u, e.v), e.weight);
    d(e.v, e.u) = std::min(d(e.v, e.u), e.weight);
  }
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
  return d;
}

/// pi_i = d_i / 2W from the edge list.
inline std::vector<double> oracle_stationary(const WeightedGraph& g) {
  std::vector<double> deg(g.num_vertices(), 0.0);
  double total = 0.0;
  for (const auto& e : g.edges()) {
    deg[e.u] += e.weight;
    deg[e.v] += e.weight;
    total += e.weight;
  }
  for (auto& d : deg) d /= 2.0 * total;
  return deg;
}

struct OracleCut {
  double flow;
  double mass;
  double conductance;
};

/// Q(S, complement) = sum of crossing weights / 2W; pi_S from degrees.
inline OracleCut oracle_cut(const WeightedGraph& g, const std::vector<char>& in_s) {
  double total = 0.0;
  double crossing = 0.0;
  for (const auto& e : g.edges()) {
    total += e.weight;
    if (in_s[e.u] != in_s[e.v]) crossing += e.weight;
  }
  const auto pi = oracle_stationary(g);
  double mass = 0.0;
  for (std::size_t v = 0; v < pi.size(); ++v)
    if (in_s[v]) mass += pi[v];
  const double flow = crossing / (2.0 * total);
  return {flow, mass, flow / mass};
}

/// min Phi(S) over nonempty proper S with pi_S <= budget, by plain binary
/// counting over all 2^n subsets.
inline double oracle_chain_conductance(const WeightedGraph& g, double budget) {
  const std::size_t n = g.num_vertices();
  double best = std::numeric_limits<double>::infinity();
  std::vector<char> in_s(n);
  for (std::uint64_t mask = 1; mask + 1 < (std::uint64_t{1} << n); ++mask) {
    for (std::size_t v = 0; v < n; ++v) in_s[v] = (mask >> v) & 1u;
    const auto cut = oracle_cut(g, in_s);
    if (cut.mass <= budget + 1e-12) best = std::min(best, cut.conductance);
  }
  return best;
}

struct OracleBall {
  bool feasible;
  double value;
  double radius;
};

/// Induced conductance by enumerating every distinct distance from the
/// center (Floyd-Warshall) and evaluating each ball from the edge list.
inline OracleBall oracle_induced(const WeightedGraph& g, VertexId center, double max_radius, double budget) {
  const auto d = floyd_warshall(g);
  const std::size_t n = g.num_vertices();
  std::set<double> radii;
  for (std::size_t v = 0; v < n; ++v)
    if (std::isfinite(d(center, v))) radii.insert(d(center, v));
  OracleBall best{false, std::numeric_limits<double>::infinity(), 0.0};
  for (const double z : radii) {
    if (z > max_radius) break;
    std::vector<char> in_s(n, 0);
    std::size_t count = 0;
    for (std::size_t v = 0; v < n; ++v)
      if (d(center, v) <= z) {
        in_s[v] = 1;
        ++count;
      }
    if (count == n) continue;
    const auto cut = oracle_cut(g, in_s);
    if (cut.mass > budget + 1e-12) continue;
    if (!best.feasible || cut.conductance < best.value - 1e-12) best = {true, cut.conductance, z};
  }
  return best;
}

// ---------------------------------------------------------------------------
// GP oracles

inline Eigen::MatrixXd oracle_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double ell, double sf2) {
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      double sq = 0.0;
      for (Eigen::Index c = 0; c < a.cols(); ++c) sq += (a(i, c) - b(j, c)) * (a(i, c) - b(j, c));
      k(i, j) = sf2 * std::exp(-sq / (2.0 * ell * ell));
    }
  return k;
}

/// log N(y | 0, C) with C^{-1} and log det from a dense LU.
inline double oracle_log_gaussian(const Eigen::VectorXd& y, const Eigen::MatrixXd& c) {
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(c);
  const Eigen::MatrixXd inv = lu.inverse();
  double logdet = 0.0;
  const Eigen::MatrixXd u = lu.matrixLU();
  for (Eigen::Index i = 0; i < u.rows(); ++i) logdet += std::log(std::abs(u(i, i)));
  return -0.5 * y.dot(inv * y) - 0.5 * logdet - 0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
}

// ---------------------------------------------------------------------------
// Clustering oracle

/// ARI from explicit pair agreement counts, O(n^2).
inline double oracle_ari(const std::vector<long long>& a, const std::vector<long long>& b) {
  const std::size_t n = a.size();
  double both = 0.0, in_a = 0.0, in_b = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool sa = a[i] == a[j];
      const bool sb = b[i] == b[j];
      both += sa && sb;
      in_a += sa;
      in_b += sb;
    }
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const double expected = in_a * in_b / pairs;
  const double max_index = 0.5 * (in_a + in_b);
  if (max_index == expected) return 1.0;
  return (both - expected) / (max_index - expected);
}

// ---------------------------------------------------------------------------
// Point data

struct Blobs {
  Eigen::MatrixXd points;
  std::vector<long long> labels;
};

/// Two isotropic unit-variance 2-D Gaussian blobs whose centers are
/// `separation` standard deviations apart.
inline Blobs gaussian_blobs(std::uint64_t seed, int per_blob = 100, double separation = 6.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Blobs b;
  b.points.resize(2 * per_blob, 2);
  b.labels.resize(static_cast<std::size_t>(2 * per_blob));
  for (int i = 0; i < 2 * per_blob; ++i) {
    const bool second = i >= per_blob;
    b.points(i, 0) = normal(rng) + (second ? separation : 0.0);
    b.points(i, 1) = normal(rng);
    b.labels[static_cast<std::size_t>(i)] = second ? 1 : 0;
  }
  return b;
}

/// Inputs uniform in [-3, 3]^2 and targets drawn from a zero-mean GP with
/// the given hyperparameters plus Gaussian noise.
inline void synthetic_gp_data(std::uint64_t seed, int n, double ell, double sf2, double sn2, Eigen::MatrixXd& x,
                              Eigen::VectorXd& y) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  x.resize(n, 2);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = unif(rng);
    x(i, 1) = unif(rng);
  }
  Eigen::MatrixXd k = oracle_kernel(x, x, ell, sf2);
  k.diagonal().array() += 1e-10;
  const Eigen::MatrixXd l = k.llt().matrixL();
  Eigen::VectorXd z(n), e(n);
  for (int i = 0; i < n; ++i) z[i] = normal(rng);
  for (int i = 0; i < n; ++i) e[i] = normal(rng);
  y = l * z + std::sqrt(sn2) * e;
}

}  // namespace conducta::testing
