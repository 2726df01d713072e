#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "conducta/clustering.hpp"
#include "conducta/conductance.hpp"
#include "conducta/embedding.hpp"
#include "conducta/graph.hpp"
#include "conducta/mcmc.hpp"

namespace conducta {

enum class Selection { lowest_predicted, highest_predicted };
enum class RemainderPolicy { unassigned, own_cluster, nearest_cluster };

Selection parse_selection(const std::string& name);
std::string to_string(Selection selection);
RemainderPolicy parse_remainder_policy(const std::string& name);
std::string to_string(RemainderPolicy policy);

struct StopRule {
  std::size_t max_clusters = 0;              // 0: unlimited
  std::optional<double> min_remaining_mass;  // default: the mass budget
  /// Carving stops once a value reaches threshold_fraction times the largest
  /// training conductance.
  double threshold_fraction = 0.9;
};

struct PipelineConfig {
  std::size_t r_refs = 8;
  std::optional<double> max_radius;  // empty: per-center median distance
  double mass_budget = 0.5;
  std::optional<std::size_t> n_train;  // empty: min(n, 100)
  std::size_t n_test = 500;
  std::uint64_t seed = 0;
  Selection selection = Selection::lowest_predicted;
  StopRule stop;
  RemainderPolicy remainder = RemainderPolicy::own_cluster;
  /// Rank by exact induced conductance instead of GP predictions (no MCMC).
  bool exact_mode = false;
  std::size_t restarts = 1;
  MhConfig mh;
  HyperPriors priors;
  std::size_t mixture_subsample = 50;
  // Only used when the graph is built from a point cloud.
  std::size_t knn_k = 8;
  KnnWeighting weighting;

  /// Checks everything that can be checked before any computation, against a
  /// graph with n vertices.
  void validate(std::size_t n) const;
};

/// n_train distinct vertices, uniform without replacement.
std::vector<VertexId> select_training_vertices(const WeightedGraph& g, std::size_t n_train, std::uint64_t seed);

struct TrainingSet {
  std::vector<VertexId> vertices;  // feasible training vertices
  Eigen::MatrixXd inputs;          // embedding rows, one per vertex
  Eigen::VectorXd targets;         // induced conductance
  std::vector<double> radii;       // best ball radius per vertex
  std::vector<VertexId> skipped;   // no feasible ball
};

/// Induced conductance at each training vertex. max_radius empty means the
/// per-center median distance. Throws NumericalError if every vertex is
/// infeasible.
TrainingSet build_training_set(const WeightedGraph& g, const RandomWalk& walk, const EmbeddingTable& emb,
                               std::span<const VertexId> vertices, std::optional<double> max_radius, double budget);

struct CarvingLog {
  std::string stop_reason;
  double threshold = 0.0;
  std::vector<VertexId> skipped_candidates;  // no feasible ball on the residual
};

/// Iterative ball carving on a connected graph. Candidates are ranked by
/// `scores` (clamped to [0, 1]) in the configured direction; the top one has
/// its best ball recomputed on what remains of its residual component, the
/// ball becomes a cluster and is removed. In lowest_predicted mode a ball is
/// only carved while its conductance is below both `threshold` and the
/// conductance of the residual region it is carved from.
Clustering extract_clusters(const WeightedGraph& g, const RandomWalk& walk, std::span<const VertexId> candidates,
                            std::span<const double> scores, double threshold, const PipelineConfig& cfg,
                            CarvingLog* log = nullptr);

struct PipelineReport {
  std::size_t input_vertices = 0;
  std::vector<VertexId> component;  // vertices the pipeline ran on (input ids)
  std::vector<std::string> warnings;
  ReferenceSet references;          // input ids
  TrainingSet training;             // input ids
  std::vector<VertexId> test_vertices;
  Eigen::VectorXd test_mean;
  Eigen::VectorXd test_variance;
  std::optional<Diagnostics> diagnostics;
  CarvingLog carving;
  std::size_t restart_used = 0;
  std::uint64_t seed = 0;
};

struct PipelineResult {
  Clustering clustering;  // input ids; vertices outside `component` are unassigned
  PosteriorSamples samples;
  EmbeddingTable embedding;  // rows follow report.component
  PipelineReport report;
};

/// Reference sampling, embedding, training conductances, GP + MH learning,
/// and ball carving. A disconnected graph is restricted to its largest
/// component. Deterministic in cfg.seed.
PipelineResult run_algorithm1(const WeightedGraph& g, const PipelineConfig& cfg);

}  // namespace conducta
