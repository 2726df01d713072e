#include "conducta/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <set>

#include "conducta/error.hpp"
#include "conducta/io.hpp"

namespace conducta {

WeightedGraph::WeightedGraph(std::size_t num_vertices, std::vector<Edge> edges)
    : edges_(std::move(edges)), adjacency_(num_vertices), degree_(num_vertices, 0.0) {
  if (num_vertices == 0) throw InputError("graph must have at least one vertex");
  std::set<std::pair<VertexId, VertexId>> seen;
  for (const auto& e : edges_) {
    if (e.u >= num_vertices || e.v >= num_vertices) {
      throw InputError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                       ") references a vertex outside [0, " + std::to_string(num_vertices) + ")");
    }
    if (e.u == e.v) throw InputError("self-loop at vertex " + std::to_string(e.u));
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw InputError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                       ") has non-positive or non-finite weight");
    }
    if (!seen.emplace(std::min(e.u, e.v), std::max(e.u, e.v)).second) {
      throw InputError("duplicate edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) + ")");
    }
    adjacency_[e.u].push_back({e.v, e.weight});
    adjacency_[e.v].push_back({e.u, e.weight});
    degree_[e.u] += e.weight;
    degree_[e.v] += e.weight;
    total_weight_ += e.weight;
  }
  for (auto& list : adjacency_) {
    std::sort(list.begin(), list.end(),
              [](const Neighbor& a, const Neighbor& b) { return a.vertex < b.vertex; });
  }
}

PointCloud::PointCloud(Eigen::MatrixXd points) : points_(std::move(points)) {
  if (!points_.allFinite()) throw InputError("point cloud contains non-finite coordinates");
}

WeightMode parse_weight_mode(const std::string& name) {
  if (name == "distance") return WeightMode::distance;
  if (name == "inverse_distance") return WeightMode::inverse_distance;
  if (name == "gaussian") return WeightMode::gaussian;
  throw InputError("unknown weight mode '" + name + "' (expected distance, inverse_distance or gaussian)");
}

std::string to_string(WeightMode mode) {
  switch (mode) {
    case WeightMode::distance: return "distance";
    case WeightMode::inverse_distance: return "inverse_distance";
    case WeightMode::gaussian: return "gaussian";
  }
  return "distance";
}

// ---------------------------------------------------------------------------

WeightedGraph parse_edge_list(std::istream& in, const std::string& source) {
  std::vector<Edge> edges;
  std::set<std::pair<VertexId, VertexId>> seen;
  std::size_t declared_vertices = 0;
  std::size_t max_id_plus_one = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) {
      // "# vertices N" keeps trailing isolated vertices across a round trip.
      const auto comment = split_whitespace(body.substr(hash + 1));
      if (comment.size() == 2 && comment[0] == "vertices") {
        const auto n = parse_integer(comment[1]);
        if (!n || *n < 1) throw ParseError(source, line_no, "bad vertex count '" + comment[1] + "'");
        declared_vertices = static_cast<std::size_t>(*n);
      }
      body = body.substr(0, hash);
    }
    const auto tokens = split_whitespace(body);
    if (tokens.empty()) continue;
    if (tokens.size() != 3) {
      throw ParseError(source, line_no, "expected 'u v w', found " + std::to_string(tokens.size()) + " fields");
    }
    const auto u = parse_integer(tokens[0]);
    const auto v = parse_integer(tokens[1]);
    const auto w = parse_real(tokens[2]);
    if (!u || !v || *u < 0 || *v < 0) throw ParseError(source, line_no, "vertex ids must be non-negative integers");
    if (!w) throw ParseError(source, line_no, "weight is not a number: '" + tokens[2] + "'");
    if (*u == *v) throw ParseError(source, line_no, "self-loop at vertex " + tokens[0]);
    if (!(*w > 0.0) || !std::isfinite(*w)) throw ParseError(source, line_no, "non-positive weight " + tokens[2]);
    const auto a = static_cast<VertexId>(std::min(*u, *v));
    const auto b = static_cast<VertexId>(std::max(*u, *v));
    if (!seen.emplace(a, b).second) {
      throw ParseError(source, line_no, "duplicate edge (" + tokens[0] + ", " + tokens[1] + ")");
    }
    edges.push_back({static_cast<VertexId>(*u), static_cast<VertexId>(*v), *w});
    max_id_plus_one = std::max(max_id_plus_one, b + 1);
  }
  if (declared_vertices != 0 && declared_vertices < max_id_plus_one) {
    throw InputError(source + ": declared vertex count is smaller than the largest vertex id");
  }
  const std::size_t n = std::max(declared_vertices, max_id_plus_one);
  if (n == 0) throw InputError(source + ": no edges");
  return WeightedGraph(n, std::move(edges));
}

WeightedGraph load_edge_list(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_edge_list(in, path.string());
}

void write_edge_list(std::ostream& out, const WeightedGraph& g) {
  out << "# vertices " << g.num_vertices() << "\n";
  for (const auto& e : g.edges()) out << e.u << ' ' << e.v << ' ' << format_real(e.weight) << '\n';
}

PointCloud parse_point_cloud(std::istream& in, const std::string& source) {
  auto table = parse_numeric_csv(in, source);
  if (table.values.rows() == 0) throw InputError(source + ": no points");
  return PointCloud(std::move(table.values));
}

PointCloud load_point_cloud(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_point_cloud(in, path.string());
}

// ---------------------------------------------------------------------------

WeightedGraph build_knn_graph(const PointCloud& cloud, std::size_t k, KnnWeighting weighting) {
  const auto m = static_cast<std::size_t>(cloud.size());
  if (m < 2) throw InputError("kNN graph needs at least two points");
  if (k < 1 || k >= m) {
    throw InputError("k must satisfy 1 <= k < point count (k=" + std::to_string(k) +
                     ", points=" + std::to_string(m) + ")");
  }
  if (weighting.mode == WeightMode::gaussian && !(weighting.sigma > 0.0)) {
    throw InputError("gaussian weighting needs sigma > 0");
  }
  const auto& pts = cloud.points();

  std::set<std::pair<VertexId, VertexId>> pairs;
  std::vector<std::pair<double, VertexId>> candidates(m - 1);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      candidates[c++] = {(pts.row(i) - pts.row(j)).squaredNorm(), j};
    }
    // Lexicographic pair order breaks distance ties by vertex id.
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k), candidates.end());
    for (std::size_t t = 0; t < k; ++t) {
      const VertexId j = candidates[t].second;
      pairs.emplace(std::min(i, j), std::max(i, j));
    }
  }

  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    const double d = std::max((pts.row(a) - pts.row(b)).norm(), kCoincidentDistance);
    double w = d;
    switch (weighting.mode) {
      case WeightMode::distance: break;
      case WeightMode::inverse_distance: w = 1.0 / d; break;
      case WeightMode::gaussian:
        w = std::max(std::exp(-d * d / (2.0 * weighting.sigma * weighting.sigma)),
                     std::numeric_limits<double>::min());
        break;
    }
    edges.push_back({a, b, w});
  }
  return WeightedGraph(m, std::move(edges));
}

Eigen::VectorXd shortest_paths(const WeightedGraph& g, VertexId source) {
  const std::size_t n = g.num_vertices();
  if (source >= n) throw InputError("source vertex " + std::to_string(source) + " out of range");
  Eigen::VectorXd dist = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n),
                                                   std::numeric_limits<double>::infinity());
  using Item = std::pair<double, VertexId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[static_cast<Eigen::Index>(source)] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[static_cast<Eigen::Index>(u)]) continue;
    for (const auto& nb : g.neighbors(u)) {
      const double cand = d + nb.weight;
      auto& dv = dist[static_cast<Eigen::Index>(nb.vertex)];
      if (cand < dv) {
        dv = cand;
        heap.emplace(cand, nb.vertex);
      }
    }
  }
  return dist;
}

std::vector<std::vector<VertexId>> connected_components(const WeightedGraph& g) {
  const std::size_t n = g.num_vertices();
  std::vector<bool> visited(n, false);
  std::vector<std::vector<VertexId>> components;
  std::vector<VertexId> stack;
  for (VertexId s = 0; s < n; ++s) {
    if (visited[s]) continue;
    auto& comp = components.emplace_back();
    visited[s] = true;
    stack.push_back(s);
    while (!stack.empty()) {
      const VertexId u = stack.back();
      stack.pop_back();
      comp.push_back(u);
      for (const auto& nb : g.neighbors(u)) {
        if (!visited[nb.vertex]) {
          visited[nb.vertex] = true;
          stack.push_back(nb.vertex);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
  }
  return components;
}

std::size_t largest_component_index(const std::vector<std::vector<VertexId>>& components) {
  if (components.empty()) throw InputError("no components");
  std::size_t best = 0;
  for (std::size_t i = 1; i < components.size(); ++i)
    if (components[i].size() > components[best].size()) best = i;
  return best;
}

Subgraph induced_subgraph(const WeightedGraph& g, std::span<const VertexId> vertices) {
  constexpr auto kAbsent = std::numeric_limits<VertexId>::max();
  std::vector<VertexId> local(g.num_vertices(), kAbsent);
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (vertices[i] >= g.num_vertices()) throw InputError("subgraph vertex out of range");
    if (local[vertices[i]] != kAbsent) throw InputError("subgraph vertex listed twice");
    local[vertices[i]] = i;
  }
  std::vector<Edge> edges;
  for (const auto& e : g.edges()) {
    if (local[e.u] != kAbsent && local[e.v] != kAbsent) edges.push_back({local[e.u], local[e.v], e.weight});
  }
  return {WeightedGraph(vertices.size(), std::move(edges)),
          std::vector<VertexId>(vertices.begin(), vertices.end())};
}

// ---------------------------------------------------------------------------

RandomWalk random_walk(const WeightedGraph& g) {
  const std::size_t n = g.num_vertices();
  if (n < 2 || connected_components(g).size() != 1) {
    throw InputError("random walk needs a connected graph with at least two vertices; "
                     "restrict the input to one connected component first");
  }
  const auto size = static_cast<Eigen::Index>(n);
  RandomWalk::Transition p(size, size);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * g.num_edges());
  Eigen::VectorXd pi(size);
  const double two_w = 2.0 * g.total_weight();
  for (VertexId i = 0; i < n; ++i) {
    const double d = g.weighted_degree(i);
    pi[static_cast<Eigen::Index>(i)] = d / two_w;
    for (const auto& nb : g.neighbors(i)) {
      triplets.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(nb.vertex), nb.weight / d);
    }
  }
  p.setFromTriplets(triplets.begin(), triplets.end());
  p.makeCompressed();
  return RandomWalk(std::move(p), std::move(pi));
}

}  // namespace conducta
