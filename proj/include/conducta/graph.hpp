#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace conducta {

using VertexId = std::size_t;

struct Edge {
  VertexId u;
  VertexId v;
  double weight;
};

struct Neighbor {
  VertexId vertex;
  double weight;
};

/// Undirected graph with strictly positive, finite edge weights.
///
/// Vertex ids are dense in [0, n). Construction validates every edge and
/// rejects self-loops, duplicates (in either orientation), non-positive or
/// non-finite weights and out-of-range endpoints. The object is immutable
/// afterwards.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  WeightedGraph(std::size_t num_vertices, std::vector<Edge> edges);

  std::size_t num_vertices() const noexcept { return adjacency_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::span<const Neighbor> neighbors(VertexId v) const { return adjacency_.at(v); }

  /// d_v = sum of incident edge weights.
  double weighted_degree(VertexId v) const { return degree_.at(v); }
  /// W = sum of all edge weights (each undirected edge counted once).
  double total_weight() const noexcept { return total_weight_; }

 private:
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<double> degree_;
  double total_weight_ = 0.0;
};

/// Row-major point matrix, one point per row.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(Eigen::MatrixXd points);

  Eigen::Index size() const noexcept { return points_.rows(); }
  Eigen::Index dim() const noexcept { return points_.cols(); }
  const Eigen::MatrixXd& points() const noexcept { return points_; }

 private:
  Eigen::MatrixXd points_;
};

enum class WeightMode { distance, inverse_distance, gaussian };

struct KnnWeighting {
  WeightMode mode = WeightMode::distance;
  double sigma = 1.0;  // gaussian bandwidth
};

/// Zero distances are clamped to this value so every weight stays positive.
inline constexpr double kCoincidentDistance = 1e-12;

WeightMode parse_weight_mode(const std::string& name);
std::string to_string(WeightMode mode);

// ---------------------------------------------------------------------------
// Ingestion and serialization

WeightedGraph parse_edge_list(std::istream& in, const std::string& source = "<stream>");
WeightedGraph load_edge_list(const std::filesystem::path& path);
void write_edge_list(std::ostream& out, const WeightedGraph& g);

PointCloud parse_point_cloud(std::istream& in, const std::string& source = "<stream>");
PointCloud load_point_cloud(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Construction and traversal

/// Symmetric kNN graph: (i, j) is an edge when either point lists the other
/// among its k nearest neighbours. Distance ties go to the lower vertex id.
WeightedGraph build_knn_graph(const PointCloud& cloud, std::size_t k, KnnWeighting weighting = {});

/// Dijkstra distances from `source`; unreachable vertices get +inf.
Eigen::VectorXd shortest_paths(const WeightedGraph& g, VertexId source);

/// Components in order of their smallest vertex id; members ascending.
std::vector<std::vector<VertexId>> connected_components(const WeightedGraph& g);

/// Index into connected_components(g) of the largest component (ties go to
/// the earlier one).
std::size_t largest_component_index(const std::vector<std::vector<VertexId>>& components);

struct Subgraph {
  WeightedGraph graph;
  std::vector<VertexId> to_parent;  // local id -> id in the parent graph
};

/// Graph induced on `vertices`, relabelled 0..k-1 in the given order.
Subgraph induced_subgraph(const WeightedGraph& g, std::span<const VertexId> vertices);

// ---------------------------------------------------------------------------
// Random walk

/// Simple random walk on a connected weighted graph: p_ij = w_ij / d_i and
/// pi_i = d_i / 2W. The walk is reversible, so pi_i p_ij = pi_j p_ji.
class RandomWalk {
 public:
  using Transition = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  RandomWalk() = default;
  RandomWalk(Transition transition, Eigen::VectorXd stationary)
      : transition_(std::move(transition)), stationary_(std::move(stationary)) {}

  Eigen::Index size() const noexcept { return stationary_.size(); }
  const Transition& transition() const noexcept { return transition_; }
  const Eigen::VectorXd& stationary() const noexcept { return stationary_; }

 private:
  Transition transition_;
  Eigen::VectorXd stationary_;
};

/// Throws InputError on a disconnected graph; restrict to a component first.
RandomWalk random_walk(const WeightedGraph& g);

}  // namespace conducta
