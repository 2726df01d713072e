#include "conducta/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <tuple>

#include "conducta/error.hpp"
#include "conducta/parallel.hpp"

namespace conducta {

Selection parse_selection(const std::string& name) {
  if (name == "lowest_predicted") return Selection::lowest_predicted;
  if (name == "highest_predicted") return Selection::highest_predicted;
  throw InputError("unknown selection '" + name + "' (expected lowest_predicted or highest_predicted)");
}

std::string to_string(Selection selection) {
  return selection == Selection::lowest_predicted ? "lowest_predicted" : "highest_predicted";
}

RemainderPolicy parse_remainder_policy(const std::string& name) {
  if (name == "unassigned") return RemainderPolicy::unassigned;
  if (name == "own_cluster") return RemainderPolicy::own_cluster;
  if (name == "nearest_cluster") return RemainderPolicy::nearest_cluster;
  throw InputError("unknown remainder policy '" + name + "' (expected unassigned, own_cluster or nearest_cluster)");
}

std::string to_string(RemainderPolicy policy) {
  switch (policy) {
    case RemainderPolicy::unassigned: return "unassigned";
    case RemainderPolicy::own_cluster: return "own_cluster";
    case RemainderPolicy::nearest_cluster: return "nearest_cluster";
  }
  return "own_cluster";
}

void PipelineConfig::validate(std::size_t n) const {
  if (r_refs < 1 || r_refs > n) {
    throw InputError("r_refs must be in [1, " + std::to_string(n) + "], got " + std::to_string(r_refs));
  }
  if (max_radius && !(*max_radius > 0.0)) throw InputError("R_max must be positive");
  if (!(mass_budget > 0.0 && mass_budget <= 1.0)) throw InputError("mass_budget must lie in (0, 1]");
  if (n_train && (*n_train < 2 || *n_train > n)) {
    throw InputError("n_train must be in [2, " + std::to_string(n) + "], got " + std::to_string(*n_train));
  }
  if (n_test < 1) throw InputError("n_test must be at least 1");
  if (!(stop.threshold_fraction > 0.0)) throw InputError("stop threshold fraction must be positive");
  if (stop.min_remaining_mass && !(*stop.min_remaining_mass >= 0.0)) {
    throw InputError("min_remaining_mass must be non-negative");
  }
  if (restarts < 1) throw InputError("restarts must be at least 1");
  if (mixture_subsample < 1) throw InputError("mixture subsample must be at least 1");
  for (const auto* prior : {&priors.lengthscale, &priors.signal_var, &priors.noise_var}) {
    if (*prior) (*prior)->validate();
  }
  if (!exact_mode) mh.validate();
}

std::vector<VertexId> select_training_vertices(const WeightedGraph& g, std::size_t n_train, std::uint64_t seed) {
  if (n_train < 1 || n_train > g.num_vertices()) {
    throw InputError("n_train must be in [1, " + std::to_string(g.num_vertices()) + "]");
  }
  return sample_vertices(g.num_vertices(), n_train, seed);
}

TrainingSet build_training_set(const WeightedGraph& g, const RandomWalk& walk, const EmbeddingTable& emb,
                               std::span<const VertexId> vertices, std::optional<double> max_radius, double budget) {
  if (static_cast<std::size_t>(emb.size()) != g.num_vertices()) {
    throw InputError("embedding does not match graph size");
  }
  std::vector<std::optional<BallMinimum>> results(vertices.size());
  parallel_for(vertices.size(), [&](std::size_t i) {
    const auto d = shortest_paths(g, vertices[i]);
    const double radius = max_radius.value_or(median_radius(d, vertices[i]));
    results[i] = induced_conductance(walk, d, vertices[i], radius, budget).best;
  });

  TrainingSet out;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (results[i]) out.vertices.push_back(vertices[i]);
    else out.skipped.push_back(vertices[i]);
  }
  if (out.vertices.empty()) throw NumericalError("no training vertex has a feasible ball");
  const auto count = static_cast<Eigen::Index>(out.vertices.size());
  out.inputs.resize(count, emb.dim());
  out.targets.resize(count);
  for (std::size_t i = 0, k = 0; i < vertices.size(); ++i) {
    if (!results[i]) continue;
    const auto row = static_cast<Eigen::Index>(k++);
    out.inputs.row(row) = emb.coords.row(static_cast<Eigen::Index>(vertices[i]));
    out.targets[row] = results[i]->value;
    out.radii.push_back(results[i]->radius);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<VertexId> members_of(const std::vector<char>& mask) {
  std::vector<VertexId> out;
  for (std::size_t v = 0; v < mask.size(); ++v)
    if (mask[v]) out.push_back(v);
  return out;
}

// Component of `start` in the subgraph induced by `mask`, ascending.
std::vector<VertexId> residual_component(const WeightedGraph& g, const std::vector<char>& mask, VertexId start) {
  std::vector<char> seen(mask.size(), 0);
  std::vector<VertexId> stack{start};
  std::vector<VertexId> out;
  seen[start] = 1;
  while (!stack.empty()) {
    const VertexId u = stack.back();
    stack.pop_back();
    out.push_back(u);
    for (const auto& nb : g.neighbors(u)) {
      if (mask[nb.vertex] && !seen[nb.vertex]) {
        seen[nb.vertex] = 1;
        stack.push_back(nb.vertex);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Multi-source Dijkstra: index of the nearest cluster for each vertex, or -1.
std::vector<long long> nearest_cluster(const WeightedGraph& g, const std::vector<Cluster>& clusters) {
  const std::size_t n = g.num_vertices();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<long long> label(n, -1);
  using Item = std::tuple<double, long long, VertexId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (const VertexId v : clusters[c].members) {
      dist[v] = 0.0;
      label[v] = static_cast<long long>(c);
      heap.emplace(0.0, static_cast<long long>(c), v);
    }
  }
  while (!heap.empty()) {
    const auto [d, c, u] = heap.top();
    heap.pop();
    if (d > dist[u] || c != label[u]) continue;
    for (const auto& nb : g.neighbors(u)) {
      const double cand = d + nb.weight;
      if (cand < dist[nb.vertex] || (cand == dist[nb.vertex] && c < label[nb.vertex])) {
        dist[nb.vertex] = cand;
        label[nb.vertex] = c;
        heap.emplace(cand, c, nb.vertex);
      }
    }
  }
  return label;
}

}  // namespace

Clustering extract_clusters(const WeightedGraph& g, const RandomWalk& walk, std::span<const VertexId> candidates,
                            std::span<const double> scores, double threshold, const PipelineConfig& cfg,
                            CarvingLog* log) {
  const std::size_t n = g.num_vertices();
  if (candidates.size() != scores.size()) throw InputError("one score per candidate vertex is required");
  for (const VertexId v : candidates)
    if (v >= n) throw InputError("candidate vertex " + std::to_string(v) + " out of range");

  CarvingLog local_log;
  CarvingLog& trace = log ? *log : local_log;
  trace.threshold = threshold;

  const bool lowest = cfg.selection == Selection::lowest_predicted;
  auto key = [&](std::size_t i) {
    const double s = scores[i];
    return std::isnan(s) ? 1.0 : std::clamp(s, 0.0, 1.0);
  };
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ka = key(a);
    const double kb = key(b);
    if (ka != kb) return lowest ? ka < kb : ka > kb;
    return candidates[a] < candidates[b];
  });

  const auto& pi = walk.stationary();
  const double min_mass = cfg.stop.min_remaining_mass.value_or(cfg.mass_budget);
  std::vector<char> remaining(n, 1);
  double remaining_mass = pi.sum();
  double boundary = std::numeric_limits<double>::infinity();
  Clustering out;
  std::size_t pos = 0;

  while (true) {
    if (cfg.stop.max_clusters != 0 && out.clusters.size() >= cfg.stop.max_clusters) {
      trace.stop_reason = "max_clusters";
      break;
    }
    if (remaining_mass + kMassTolerance < min_mass) {
      trace.stop_reason = "remaining_mass";
      break;
    }
    while (pos < order.size() && !remaining[candidates[order[pos]]]) ++pos;
    if (pos == order.size()) {
      trace.stop_reason = "no_candidates";
      break;
    }
    const VertexId center = candidates[order[pos]];
    const double score = key(order[pos]);
    ++pos;
    if (lowest && score > threshold) {
      trace.stop_reason = "prediction_threshold";
      break;
    }

    const auto comp = residual_component(g, remaining, center);
    if (comp.size() < 2) {
      trace.skipped_candidates.push_back(center);
      continue;
    }
    const auto residual = induced_subgraph(g, comp);
    const auto residual_walk = random_walk(residual.graph);
    const auto local_center = static_cast<VertexId>(std::lower_bound(comp.begin(), comp.end(), center) - comp.begin());
    const auto d = shortest_paths(residual.graph, local_center);
    const double radius = cfg.max_radius.value_or(median_radius(d, local_center));
    const auto induced = induced_conductance(residual_walk, d, local_center, radius, cfg.mass_budget);
    if (!induced.feasible()) {
      trace.skipped_candidates.push_back(center);
      continue;
    }
    if (lowest && induced.best->value >= threshold) {
      trace.stop_reason = "conductance_threshold";
      break;
    }
    if (lowest && induced.best->value >= boundary) {
      trace.stop_reason = "residual_boundary";
      break;
    }

    Cluster cluster;
    for (const VertexId local : ball_members(d, induced.best->radius)) cluster.members.push_back(comp[local]);
    std::sort(cluster.members.begin(), cluster.members.end());
    cluster.seed = center;
    cluster.radius = induced.best->radius;
    cluster.stats = set_conductance(walk, cluster.members);
    for (const VertexId v : cluster.members) remaining[v] = 0;
    out.clusters.push_back(std::move(cluster));

    const auto rest = members_of(remaining);
    remaining_mass = 0.0;
    for (const VertexId v : rest) remaining_mass += pi[static_cast<Eigen::Index>(v)];
    boundary = rest.empty() ? 0.0 : set_conductance(walk, rest).conductance;
  }

  auto rest = members_of(remaining);
  if (rest.empty()) return out;
  if (out.clusters.empty() || cfg.remainder == RemainderPolicy::own_cluster) {
    Cluster cluster;
    cluster.members = std::move(rest);
    if (cluster.members.size() < n) cluster.stats = set_conductance(walk, cluster.members);
    out.clusters.push_back(std::move(cluster));
  } else if (cfg.remainder == RemainderPolicy::nearest_cluster) {
    const auto label = nearest_cluster(g, out.clusters);
    for (const VertexId v : rest) {
      if (label[v] < 0) out.unassigned.push_back(v);
      else out.clusters[static_cast<std::size_t>(label[v])].members.push_back(v);
    }
    for (auto& c : out.clusters) {
      std::sort(c.members.begin(), c.members.end());
      c.stats = c.members.size() < n ? std::optional(set_conductance(walk, c.members)) : std::nullopt;
    }
  } else {
    out.unassigned = std::move(rest);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  // splitmix64 finaliser
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

template <typename F>
auto in_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("stage '") + stage + "': " + e.what());
  } catch (const InputError& e) {
    throw InputError(std::string("stage '") + stage + "': " + e.what());
  }
}

struct PassResult {
  Clustering clustering;  // local ids
  PosteriorSamples samples;
  EmbeddingTable embedding;
  ReferenceSet references;  // local ids
  TrainingSet training;     // local ids
  std::vector<VertexId> test_vertices;
  Eigen::VectorXd test_mean;
  Eigen::VectorXd test_variance;
  std::optional<Diagnostics> diagnostics;
  CarvingLog carving;
  std::vector<std::string> warnings;
};

std::vector<VertexId> choose_test_vertices(std::size_t n, const std::vector<VertexId>& training, std::size_t n_test,
                                           std::uint64_t seed) {
  std::vector<char> is_training(n, 0);
  for (const VertexId v : training) is_training[v] = 1;
  std::vector<VertexId> others;
  for (VertexId v = 0; v < n; ++v)
    if (!is_training[v]) others.push_back(v);
  std::vector<VertexId> test;
  if (others.size() > n_test) {
    for (const std::size_t i : sample_vertices(others.size(), n_test, seed)) test.push_back(others[i]);
  } else {
    test = others;
    auto sorted_training = training;
    std::sort(sorted_training.begin(), sorted_training.end());
    for (std::size_t i = 0; i < sorted_training.size() && test.size() < n_test; ++i) test.push_back(sorted_training[i]);
  }
  std::sort(test.begin(), test.end());
  return test;
}

PassResult run_pass(const WeightedGraph& g, const RandomWalk& walk, const PipelineConfig& cfg, std::uint64_t seed) {
  PassResult out;
  const std::size_t n = g.num_vertices();

  std::size_t r = cfg.r_refs;
  if (r > n) {
    out.warnings.push_back("r_refs capped at the component size " + std::to_string(n));
    r = n;
  }
  in_stage("embedding", [&] {
    out.references = sample_references(g, r, derive_seed(seed, 1));
    out.embedding = frechet_embed(g, out.references);
  });

  std::size_t n_train = cfg.n_train.value_or(std::min<std::size_t>(n, 100));
  if (n_train > n) {
    out.warnings.push_back("n_train capped at the component size " + std::to_string(n));
    n_train = n;
  }
  const auto training_vertices = select_training_vertices(g, n_train, derive_seed(seed, 2));
  out.training = in_stage("training conductance", [&] {
    return build_training_set(g, walk, out.embedding, training_vertices, cfg.max_radius, cfg.mass_budget);
  });
  if (!out.training.skipped.empty()) {
    out.warnings.push_back(std::to_string(out.training.skipped.size()) +
                           " training vertices have no feasible ball and were skipped");
  }

  out.test_vertices = choose_test_vertices(n, training_vertices, cfg.n_test, derive_seed(seed, 3));
  const auto test_count = static_cast<Eigen::Index>(out.test_vertices.size());
  if (cfg.exact_mode) {
    out.test_mean.resize(test_count);
    out.test_variance = Eigen::VectorXd::Zero(test_count);
    parallel_for(out.test_vertices.size(), [&](std::size_t i) {
      const VertexId v = out.test_vertices[i];
      const auto d = shortest_paths(g, v);
      const auto res = induced_conductance(walk, d, v, cfg.max_radius.value_or(median_radius(d, v)), cfg.mass_budget);
      out.test_mean[static_cast<Eigen::Index>(i)] = res.best ? res.best->value : std::numeric_limits<double>::quiet_NaN();
    });
  } else {
    MhConfig mh = cfg.mh;
    mh.seed = derive_seed(seed, 4);
    out.samples = in_stage("mcmc", [&] { return mh_sample(out.training.inputs, out.training.targets, cfg.priors, mh); });
    out.diagnostics = diagnostics(out.samples);
    Eigen::MatrixXd xstar(test_count, out.embedding.dim());
    for (Eigen::Index i = 0; i < test_count; ++i) {
      xstar.row(i) = out.embedding.coords.row(static_cast<Eigen::Index>(out.test_vertices[static_cast<std::size_t>(i)]));
    }
    const auto mix = in_stage("prediction", [&] {
      return predictive_mixture(out.training.inputs, out.training.targets, out.samples, xstar, cfg.mixture_subsample);
    });
    out.test_mean = mix.mean;
    out.test_variance = mix.variance;
  }

  const double threshold = cfg.stop.threshold_fraction * out.training.targets.maxCoeff();
  std::vector<double> scores(out.test_mean.data(), out.test_mean.data() + out.test_mean.size());
  out.clustering = in_stage("cluster extraction", [&] {
    return extract_clusters(g, walk, out.test_vertices, scores, threshold, cfg, &out.carving);
  });
  return out;
}

double mean_cluster_conductance(const Clustering& c) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& cluster : c.clusters) {
    if (!cluster.stats) continue;
    total += cluster.stats->conductance;
    ++count;
  }
  return count == 0 ? std::numeric_limits<double>::infinity() : total / static_cast<double>(count);
}

}  // namespace

PipelineResult run_algorithm1(const WeightedGraph& g, const PipelineConfig& cfg) {
  cfg.validate(g.num_vertices());

  PipelineResult result;
  auto& report = result.report;
  report.input_vertices = g.num_vertices();
  report.seed = cfg.seed;

  const auto components = connected_components(g);
  report.component = components[largest_component_index(components)];
  if (components.size() > 1) {
    report.warnings.push_back("graph has " + std::to_string(components.size()) +
                              " connected components; running on the largest (" +
                              std::to_string(report.component.size()) + " of " + std::to_string(g.num_vertices()) +
                              " vertices)");
  }
  if (report.component.size() < 2) throw InputError("the largest connected component has fewer than two vertices");
  const auto sub = induced_subgraph(g, report.component);
  const auto walk = random_walk(sub.graph);

  std::optional<PassResult> best;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < cfg.restarts; ++k) {
    auto pass = run_pass(sub.graph, walk, cfg, derive_seed(cfg.seed, 100 + k));
    const double score = mean_cluster_conductance(pass.clustering);
    if (!best || score < best_score) {
      best_score = score;
      best = std::move(pass);
      report.restart_used = k;
    }
  }

  auto& pass = *best;
  const auto& to_input = sub.to_parent;
  auto map_ids = [&](std::vector<VertexId> ids) {
    for (auto& v : ids) v = to_input[v];
    return ids;
  };

  std::vector<char> in_component(g.num_vertices(), 0);
  for (const VertexId v : report.component) in_component[v] = 1;
  for (auto& cluster : pass.clustering.clusters) {
    cluster.members = map_ids(std::move(cluster.members));
    if (cluster.seed) cluster.seed = to_input[*cluster.seed];
  }
  result.clustering.clusters = std::move(pass.clustering.clusters);
  result.clustering.unassigned = map_ids(std::move(pass.clustering.unassigned));
  for (VertexId v = 0; v < g.num_vertices(); ++v)
    if (!in_component[v]) result.clustering.unassigned.push_back(v);
  std::sort(result.clustering.unassigned.begin(), result.clustering.unassigned.end());

  report.warnings.insert(report.warnings.end(), pass.warnings.begin(), pass.warnings.end());
  report.references = {map_ids(pass.references.refs), pass.references.seed};
  report.training = std::move(pass.training);
  report.training.vertices = map_ids(std::move(report.training.vertices));
  report.training.skipped = map_ids(std::move(report.training.skipped));
  report.test_vertices = map_ids(std::move(pass.test_vertices));
  report.test_mean = std::move(pass.test_mean);
  report.test_variance = std::move(pass.test_variance);
  report.diagnostics = pass.diagnostics;
  report.carving = std::move(pass.carving);
  report.carving.skipped_candidates = map_ids(std::move(report.carving.skipped_candidates));
  result.samples = std::move(pass.samples);
  result.embedding = std::move(pass.embedding);
  return result;
}

}  // namespace conducta
