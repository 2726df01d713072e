#pragma once

#include <optional>
#include <span>
#include <vector>

#include "conducta/conductance.hpp"
#include "conducta/graph.hpp"

namespace conducta {

struct Cluster {
  std::vector<VertexId> members;  // ascending
  /// Vertex whose ball produced the cluster and the ball radius; both empty
  /// for a cluster formed from the leftover vertices.
  std::optional<VertexId> seed;
  std::optional<double> radius;
  /// Cut statistics in the walk the clustering was computed on; empty when
  /// the cluster is the whole vertex set.
  std::optional<CutStats> stats;
};

/// Disjoint clusters plus unassigned vertices that together cover V.
struct Clustering {
  std::vector<Cluster> clusters;
  std::vector<VertexId> unassigned;  // ascending
};

/// Label per vertex: cluster index, or -1 for unassigned vertices.
std::vector<long long> clustering_labels(const Clustering& clustering, std::size_t n);

/// Throws InputError unless clusters are nonempty, pairwise disjoint and
/// together with `unassigned` cover exactly [0, n).
void check_clustering(const Clustering& clustering, std::size_t n);

/// Pair-counting adjusted Rand index. Identical trivial partitions (where the
/// index is 0/0) score 1.
double adjusted_rand_index(std::span<const long long> a, std::span<const long long> b);

struct ClusteringScore {
  std::vector<std::optional<CutStats>> per_cluster;
  std::optional<double> mean_conductance;  // over clusters with defined conductance
  std::optional<double> ari;
};

/// Conductance of every cluster under `walk` and, when labels are given, the
/// ARI against them (unassigned vertices form one extra class).
ClusteringScore score_clustering(const Clustering& clustering, const RandomWalk& walk,
                                 const std::vector<long long>* ground_truth = nullptr);

}  // namespace conducta
