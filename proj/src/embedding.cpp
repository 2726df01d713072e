#include "conducta/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "conducta/error.hpp"
#include "conducta/io.hpp"
#include "conducta/parallel.hpp"

namespace conducta {

std::vector<VertexId> sample_vertices(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k > n) throw InputError("cannot draw " + std::to_string(k) + " distinct vertices from " + std::to_string(n));
  std::vector<VertexId> all(n);
  std::iota(all.begin(), all.end(), VertexId{0});
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  all.resize(k);
  return all;
}

ReferenceSet sample_references(const WeightedGraph& g, std::size_t r, std::uint64_t seed) {
  const std::size_t n = g.num_vertices();
  if (r < 1 || r > n) {
    throw InputError("reference count must be in [1, " + std::to_string(n) + "], got " + std::to_string(r));
  }
  return {sample_vertices(n, r, seed), seed};
}

EmbeddingTable frechet_embed(const WeightedGraph& g, const ReferenceSet& refs) {
  const auto n = static_cast<Eigen::Index>(g.num_vertices());
  const auto r = static_cast<Eigen::Index>(refs.refs.size());
  if (r == 0) throw InputError("empty reference set");
  EmbeddingTable emb;
  emb.coords.resize(n, r);
  parallel_for(refs.refs.size(), [&](std::size_t i) {
    emb.coords.col(static_cast<Eigen::Index>(i)) = shortest_paths(g, refs.refs[i]);
  });
  if (!emb.coords.allFinite()) {
    throw InputError("graph is disconnected: some vertex is unreachable from a reference vertex");
  }
  emb.norms = emb.coords.rowwise().norm();
  return emb;
}

Distortion empirical_distortion(const WeightedGraph& g, const EmbeddingTable& emb, std::size_t pair_sample,
                                std::uint64_t seed) {
  const std::size_t n = g.num_vertices();
  if (static_cast<std::size_t>(emb.size()) != n) throw InputError("embedding does not match graph size");
  Distortion out;
  if (n < 2) return out;

  auto visit = [&](VertexId x, const Eigen::VectorXd& from_x, VertexId y) {
    if (x == y) return;
    const double graph_d = from_x[static_cast<Eigen::Index>(y)];
    const double embed_d = (emb.coords.row(static_cast<Eigen::Index>(x)) -
                            emb.coords.row(static_cast<Eigen::Index>(y))).norm();
    ++out.pairs;
    if (!std::isfinite(graph_d)) return;
    out.expansion = std::max(out.expansion, embed_d / graph_d);
    out.contraction = embed_d > 0.0 ? std::max(out.contraction, graph_d / embed_d)
                                    : std::numeric_limits<double>::infinity();
  };

  if (pair_sample == 0 || n <= kExactDistortionLimit) {
    for (VertexId x = 0; x < n; ++x) {
      const auto from_x = shortest_paths(g, x);
      for (VertexId y = x + 1; y < n; ++y) visit(x, from_x, y);
    }
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<VertexId> pick(0, n - 1);
    // Group draws by source so each Dijkstra run is reused.
    std::vector<std::pair<VertexId, VertexId>> draws(pair_sample);
    for (auto& [x, y] : draws) {
      x = pick(rng);
      do { y = pick(rng); } while (y == x);
    }
    std::sort(draws.begin(), draws.end());
    Eigen::VectorXd from_x;
    VertexId current = n;
    for (const auto& [x, y] : draws) {
      if (x != current) {
        from_x = shortest_paths(g, x);
        current = x;
      }
      visit(x, from_x, y);
    }
  }
  out.distortion = out.expansion * out.contraction;
  return out;
}

void write_embedding_csv(std::ostream& out, const EmbeddingTable& emb) {
  for (Eigen::Index i = 0; i < emb.dim(); ++i) out << 'c' << i << ',';
  out << "l2norm\n";
  for (Eigen::Index x = 0; x < emb.size(); ++x) {
    for (Eigen::Index i = 0; i < emb.dim(); ++i) out << format_real(emb.coords(x, i)) << ',';
    out << format_real(emb.norms[x]) << '\n';
  }
}

}  // namespace conducta
