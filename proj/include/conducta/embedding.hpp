#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "conducta/graph.hpp"

namespace conducta {

struct ReferenceSet {
  std::vector<VertexId> refs;
  std::uint64_t seed = 0;
};

/// Vertex coordinates in l2^r: coords(x, i) is the shortest-path distance from
/// reference i to x. norms(x) is the l2 norm of row x.
struct EmbeddingTable {
  Eigen::MatrixXd coords;
  Eigen::VectorXd norms;

  Eigen::Index size() const noexcept { return coords.rows(); }
  Eigen::Index dim() const noexcept { return coords.cols(); }
};

/// k distinct ids from [0, n), uniform without replacement, in draw order.
std::vector<VertexId> sample_vertices(std::size_t n, std::size_t k, std::uint64_t seed);

/// r distinct vertices, uniform without replacement, reproducible from seed.
ReferenceSet sample_references(const WeightedGraph& g, std::size_t r, std::uint64_t seed);

/// Throws InputError if some vertex is unreachable from a reference.
EmbeddingTable frechet_embed(const WeightedGraph& g, const ReferenceSet& refs);

struct Distortion {
  double expansion = 1.0;
  double contraction = 1.0;
  double distortion = 1.0;  // expansion * contraction; +inf on a collision
  std::size_t pairs = 0;
};

/// Worst-case expansion and contraction of the embedding over vertex pairs.
///
/// expansion = max ||g(x)-g(y)|| / d(x,y) and contraction = max d(x,y) /
/// ||g(x)-g(y)||. Two distinct vertices with identical coordinates give
/// contraction = +inf. Both are floored at 1. With pair_sample = 0 or when
/// the graph has at most kExactDistortionLimit vertices every pair is used,
/// otherwise pair_sample pairs are drawn with replacement from `seed`.
Distortion empirical_distortion(const WeightedGraph& g, const EmbeddingTable& emb, std::size_t pair_sample,
                                std::uint64_t seed);

inline constexpr std::size_t kExactDistortionLimit = 500;

/// CSV: header "c0,...,c{r-1},l2norm", then one row per vertex.
void write_embedding_csv(std::ostream& out, const EmbeddingTable& emb);

}  // namespace conducta
