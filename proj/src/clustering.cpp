#include "conducta/clustering.hpp"

#include <map>
#include <string>

#include "conducta/error.hpp"

namespace conducta {

std::vector<long long> clustering_labels(const Clustering& clustering, std::size_t n) {
  std::vector<long long> labels(n, -1);
  for (std::size_t c = 0; c < clustering.clusters.size(); ++c) {
    for (const VertexId v : clustering.clusters[c].members) {
      if (v >= n) throw InputError("cluster member " + std::to_string(v) + " out of range");
      labels[v] = static_cast<long long>(c);
    }
  }
  return labels;
}

void check_clustering(const Clustering& clustering, std::size_t n) {
  std::vector<int> hits(n, 0);
  auto mark = [&](VertexId v) {
    if (v >= n) throw InputError("clustering references vertex " + std::to_string(v) + " out of range");
    if (++hits[v] > 1) throw InputError("vertex " + std::to_string(v) + " appears more than once");
  };
  for (const auto& c : clustering.clusters) {
    if (c.members.empty()) throw InputError("empty cluster");
    for (const VertexId v : c.members) mark(v);
  }
  for (const VertexId v : clustering.unassigned) mark(v);
  for (std::size_t v = 0; v < n; ++v) {
    if (hits[v] == 0) throw InputError("vertex " + std::to_string(v) + " is not covered");
  }
}

double adjusted_rand_index(std::span<const long long> a, std::span<const long long> b) {
  if (a.size() != b.size()) throw InputError("label vectors differ in length");
  const double n = static_cast<double>(a.size());
  auto choose2 = [](double x) { return 0.5 * x * (x - 1.0); };
  std::map<std::pair<long long, long long>, double> joint;
  std::map<long long, double> rows;
  std::map<long long, double> cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0;
  for (const auto& [_, c] : joint) index += choose2(c);
  double sum_rows = 0.0;
  for (const auto& [_, c] : rows) sum_rows += choose2(c);
  double sum_cols = 0.0;
  for (const auto& [_, c] : cols) sum_cols += choose2(c);
  const double expected = sum_rows * sum_cols / choose2(n);
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

ClusteringScore score_clustering(const Clustering& clustering, const RandomWalk& walk,
                                 const std::vector<long long>* ground_truth) {
  const auto n = static_cast<std::size_t>(walk.size());
  check_clustering(clustering, n);
  ClusteringScore score;
  double total = 0.0;
  std::size_t defined = 0;
  for (const auto& c : clustering.clusters) {
    if (c.members.size() == n) {
      score.per_cluster.emplace_back();
      continue;
    }
    const auto stats = set_conductance(walk, c.members);
    score.per_cluster.push_back(stats);
    total += stats.conductance;
    ++defined;
  }
  if (defined > 0) score.mean_conductance = total / static_cast<double>(defined);
  if (ground_truth) {
    if (ground_truth->size() != n) {
      throw InputError("ground truth has " + std::to_string(ground_truth->size()) + " labels for " +
                       std::to_string(n) + " vertices");
    }
    score.ari = adjusted_rand_index(clustering_labels(clustering, n), *ground_truth);
  }
  return score;
}

}  // namespace conducta
