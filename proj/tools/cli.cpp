#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "conducta/clustering.hpp"
#include "conducta/conductance.hpp"
#include "conducta/embedding.hpp"
#include "conducta/error.hpp"
#include "conducta/graph.hpp"
#include "conducta/io.hpp"
#include "conducta/mcmc.hpp"
#include "conducta/model_io.hpp"
#include "conducta/parallel.hpp"
#include "conducta/pipeline.hpp"
#include "conducta/plot.hpp"
#include "run_config.hpp"

namespace conducta::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kSeedEnv = "CONDUCTA_SEED";

// Precedence: --seed flag, then CONDUCTA_SEED, then the config value.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t configured) {
  if (flag) return *flag;
  if (const char* env = std::getenv(kSeedEnv); env && *env) {
    const auto v = parse_integer(env);
    if (!v || *v < 0) throw InputError(std::string(kSeedEnv) + " must be a non-negative integer, got '" + env + "'");
    return static_cast<std::uint64_t>(*v);
  }
  return configured;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  if (!out) throw InputError("cannot write output file: " + path.string());
}

template <typename F>
void write_file(const fs::path& path, F&& body) {
  std::ostringstream s;
  body(s);
  write_text(path, s.str());
}

ojson real_or_null(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

std::vector<long long> load_labels(const fs::path& path, std::size_t n) {
  auto in = open_input(path);
  std::vector<long long> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    const auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    const auto v = parse_integer(fields.front());
    if (!v) {
      if (labels.empty() && line_no == 1) continue;  // header
      throw ParseError(path.string(), line_no, "label is not an integer");
    }
    labels.push_back(*v);
  }
  if (labels.size() != n) {
    throw InputError(path.string() + ": " + std::to_string(labels.size()) + " labels for " + std::to_string(n) +
                     " vertices");
  }
  return labels;
}

// Coordinate columns of an embedding CSV: headers c<digits>, or every column
// when there is no header.
Eigen::MatrixXd load_coordinates(const fs::path& path) {
  const auto table = load_numeric_csv(path);
  if (table.values.rows() == 0) throw InputError(path.string() + ": no rows");
  if (table.header.empty()) return table.values;
  std::vector<Eigen::Index> cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const auto& h = table.header[c];
    if (h.size() > 1 && h[0] == 'c' && std::all_of(h.begin() + 1, h.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
      cols.push_back(static_cast<Eigen::Index>(c));
    }
  }
  if (cols.empty()) throw InputError(path.string() + ": no coordinate columns (c0, c1, ...)");
  Eigen::MatrixXd out(table.values.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = table.values.col(cols[j]);
  return out;
}

WeightedGraph load_graph_arg(const std::string& path) { return load_edge_list(path); }

void print_graph_summary(std::ostream& out, std::ostream& err, const WeightedGraph& g) {
  const auto comps = connected_components(g);
  out << "vertices " << g.num_vertices() << '\n' << "edges " << g.num_edges() << '\n' << "components " << comps.size()
      << '\n';
  if (comps.size() > 1) {
    err << "warning: graph is disconnected; largest component has " << comps[largest_component_index(comps)].size()
        << " of " << g.num_vertices() << " vertices\n";
  }
}

// ---------------------------------------------------------------------------
// build-graph

struct BuildGraphArgs {
  std::string points;
  std::string edges;
  std::size_t k = 8;
  std::string weight_mode = "distance";
  double sigma = 1.0;
  std::string out;
};

int cmd_build_graph(const BuildGraphArgs& a, std::ostream& out, std::ostream& err) {
  if (a.points.empty() == a.edges.empty()) throw InputError("build-graph needs exactly one of --points or --edges");
  WeightedGraph g;
  if (!a.points.empty()) {
    const auto cloud = load_point_cloud(a.points);
    g = build_knn_graph(cloud, a.k, {parse_weight_mode(a.weight_mode), a.sigma});
  } else {
    g = load_edge_list(a.edges);
  }
  write_file(a.out, [&](std::ostream& s) { write_edge_list(s, g); });
  print_graph_summary(out, err, g);
  return 0;
}

// ---------------------------------------------------------------------------
// embed

struct EmbedArgs {
  std::string graph;
  std::size_t refs = 8;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool distortion = false;
  std::size_t pairs = 20000;
};

int cmd_embed(const EmbedArgs& a, std::ostream& out) {
  const auto g = load_graph_arg(a.graph);
  const auto seed = resolve_seed(a.seed, 0);
  const auto refs = sample_references(g, a.refs, seed);
  const auto emb = frechet_embed(g, refs);
  write_file(a.out, [&](std::ostream& s) { write_embedding_csv(s, emb); });
  out << "seed " << seed << "\nreferences";
  for (const auto r : refs.refs) out << ' ' << r;
  out << '\n';
  if (a.distortion) {
    const auto d = empirical_distortion(g, emb, a.pairs, seed);
    out << "pairs " << d.pairs << "\nexpansion " << format_real(d.expansion) << "\ncontraction "
        << format_real(d.contraction) << "\ndistortion " << format_real(d.distortion) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// conductance

struct ConductanceArgs {
  std::string graph;
  std::string centers = "all";
  std::optional<double> radius;
  double budget = 0.5;
  std::string out;
};

std::vector<VertexId> parse_centers(const std::string& spec, std::size_t n) {
  std::vector<VertexId> out;
  if (spec == "all") {
    out.resize(n);
    std::iota(out.begin(), out.end(), VertexId{0});
    return out;
  }
  for (const auto& field : split_fields(spec, ',')) {
    const auto v = parse_integer(field);
    if (!v || *v < 0 || static_cast<std::size_t>(*v) >= n) {
      throw InputError("invalid center id '" + field + "' (graph has " + std::to_string(n) + " vertices)");
    }
    out.push_back(static_cast<VertexId>(*v));
  }
  if (out.empty()) throw InputError("no centers given");
  return out;
}

int cmd_conductance(const ConductanceArgs& a, std::ostream& out) {
  const auto g = load_graph_arg(a.graph);
  const auto centers = parse_centers(a.centers, g.num_vertices());
  if (a.radius && !(*a.radius > 0.0)) throw InputError("--radius must be positive");
  if (!(a.budget > 0.0 && a.budget <= 1.0)) throw InputError("--budget must lie in (0, 1]");
  const auto walk = random_walk(g);

  std::vector<InducedConductance> results(centers.size());
  parallel_for(centers.size(), [&](std::size_t i) {
    const auto d = shortest_paths(g, centers[i]);
    results[i] = induced_conductance(walk, d, centers[i], a.radius.value_or(median_radius(d, centers[i])), a.budget);
  });

  write_file(a.out, [&](std::ostream& s) {
    write_ball_profile_header(s);
    for (const auto& r : results) write_ball_profile_rows(s, r.profile);
  });
  out << "center,status,radius,conductance\n";
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const auto& best = results[i].best;
    out << centers[i] << ',' << (best ? "ok" : "infeasible") << ',' << (best ? format_real(best->radius) : "")
        << ',' << (best ? format_real(best->value) : "") << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// fit-gp

struct FitGpArgs {
  std::string train;
  std::optional<double> lengthscale;
  std::optional<double> signal_var;
  std::optional<double> noise_var;
  std::string samples;
  bool standardize = false;
  std::string out;
  std::string points;
  std::string predictions;
};

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

int cmd_fit_gp(const FitGpArgs& a, std::ostream& out) {
  const auto data = load_training_csv(a.train);
  auto hp = initial_hyperparams(data.inputs, data.targets);
  if (!a.samples.empty()) {
    const auto draws = load_samples_csv(a.samples).pooled();
    std::vector<double> l, s, n;
    for (const auto& d : draws) {
      l.push_back(d.lengthscale);
      s.push_back(d.signal_var);
      n.push_back(d.noise_var);
    }
    hp = {median_of(l), median_of(s), median_of(n)};
  }
  if (a.lengthscale) hp.lengthscale = *a.lengthscale;
  if (a.signal_var) hp.signal_var = *a.signal_var;
  if (a.noise_var) hp.noise_var = *a.noise_var;
  hp.validate();

  const auto gp = GpModel::fit(data.inputs, data.targets, hp, {a.standardize});
  ModelFile model;
  model.hyperparams = hp;
  model.standardize = a.standardize;
  model.n = static_cast<std::size_t>(data.inputs.rows());
  model.dim = static_cast<std::size_t>(data.inputs.cols());
  model.checksum = training_checksum(data.inputs, data.targets);
  const fs::path model_dir = fs::absolute(fs::path(a.out)).parent_path();
  model.training_file = fs::relative(fs::absolute(a.train), model_dir).generic_string();
  write_file(a.out, [&](std::ostream& s) { write_model_json(s, model); });

  out << "n " << model.n << "\ndim " << model.dim << "\nlengthscale " << format_real(hp.lengthscale) << "\nsignal_var "
      << format_real(hp.signal_var) << "\nnoise_var " << format_real(hp.noise_var) << "\njitter "
      << format_real(gp.jitter()) << "\nlog_marginal_likelihood " << format_real(gp.log_marginal_likelihood()) << '\n';

  if (!a.points.empty()) {
    if (a.predictions.empty()) throw InputError("--points needs --predictions");
    const auto xstar = load_coordinates(a.points);
    const auto pred = gp.predict(xstar, false);
    write_file(a.predictions, [&](std::ostream& s) {
      s << "row,l2norm,mean,variance\n";
      for (Eigen::Index i = 0; i < xstar.rows(); ++i) {
        s << i << ',' << format_real(xstar.row(i).norm()) << ',' << format_real(pred.mean[i]) << ','
          << format_real(pred.variance[i]) << '\n';
      }
    });
  }
  return 0;
}

// ---------------------------------------------------------------------------
// mcmc

struct McmcArgs {
  std::string train;
  std::size_t steps = 2000;
  std::size_t burn_in = 500;
  std::size_t chains = 4;
  std::vector<double> scales{0.3, 0.3, 0.3};
  bool no_adapt = false;
  std::optional<std::uint64_t> seed;
  bool flat_priors = false;
  double prior_shape = 2.0;
  double prior_omega = 1.0;
  std::string out;
  std::string diagnostics;
};

const std::array<const char*, 3> kParamNames{"lengthscale", "signal_var", "noise_var"};

ojson diagnostics_json(const PosteriorSamples& samples) {
  const auto diag = diagnostics(samples);
  const auto pooled = samples.pooled();
  ojson j;
  j["chains"] = samples.chains.size();
  j["draws_per_chain"] = samples.chains.empty() ? 0 : samples.chains.front().draws.size();
  j["burn_in"] = samples.burn_in;
  j["acceptance"] = diag.acceptance;
  ojson params;
  for (std::size_t p = 0; p < 3; ++p) {
    std::vector<double> v;
    for (const auto& d : pooled) v.push_back(p == 0 ? d.lengthscale : p == 1 ? d.signal_var : d.noise_var);
    ojson e;
    e["median"] = median_of(v);
    if (diag.ess[p]) e["ess"] = *diag.ess[p];
    if (samples.chains.size() > 1 && diag.rhat[p]) e["rhat"] = *diag.rhat[p];
    params[kParamNames[p]] = e;
  }
  j["parameters"] = params;
  return j;
}

int cmd_mcmc(const McmcArgs& a, std::ostream& out) {
  const auto data = load_training_csv(a.train);
  MhConfig cfg;
  cfg.steps = a.steps;
  cfg.burn_in = a.burn_in;
  cfg.chains = a.chains;
  if (a.scales.size() != 3) throw InputError("--scales needs three values");
  std::copy(a.scales.begin(), a.scales.end(), cfg.proposal_scales.begin());
  cfg.adapt = !a.no_adapt;
  cfg.seed = resolve_seed(a.seed, 0);
  cfg.validate();
  HyperPriors priors = HyperPriors::flat();
  if (!a.flat_priors) {
    const GammaPrecisionPrior prior{a.prior_shape, a.prior_omega};
    prior.validate();
    priors = {prior, prior, prior};
  }
  const auto samples = mh_sample(data.inputs, data.targets, priors, cfg);
  write_file(a.out, [&](std::ostream& s) { write_samples_csv(s, samples); });
  const auto diag = diagnostics_json(samples);
  if (!a.diagnostics.empty()) write_text(a.diagnostics, diag.dump(2) + "\n");
  out << diag.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// partition

struct PartitionArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string output_dir;
};

ojson cluster_json(const Cluster& c) {
  ojson j;
  j["size"] = c.members.size();
  j["members"] = c.members;
  j["seed_vertex"] = c.seed ? ojson(*c.seed) : ojson(nullptr);
  j["radius"] = c.radius ? ojson(*c.radius) : ojson(nullptr);
  j["conductance"] = c.stats ? real_or_null(c.stats->conductance) : ojson(nullptr);
  j["pi_mass"] = c.stats ? ojson(c.stats->pi_mass) : ojson(nullptr);
  j["flow"] = c.stats ? ojson(c.stats->flow) : ojson(nullptr);
  return j;
}

int cmd_partition(const PartitionArgs& a, std::ostream& out, std::ostream& err) {
  auto run = load_run_config(a.config);
  if (!a.output_dir.empty()) {
    run.output_dir = fs::absolute(a.output_dir).string();
  }
  run.pipeline.seed = resolve_seed(a.seed, run.pipeline.seed);
  run.validate_paths();

  WeightedGraph g;
  std::string input_path;
  if (!run.edges.empty()) {
    input_path = run.edges;
    g = load_edge_list(run.resolve(run.edges));
  } else {
    input_path = run.points;
    g = build_knn_graph(load_point_cloud(run.resolve(run.points)), run.pipeline.knn_k, run.pipeline.weighting);
  }
  const std::size_t n = g.num_vertices();
  std::optional<std::vector<long long>> truth;
  if (!run.labels.empty()) truth = load_labels(run.resolve(run.labels), n);
  run.pipeline.validate(n);

  const auto result = run_algorithm1(g, run.pipeline);
  const auto& report = result.report;
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';

  double total = 0.0;
  std::size_t defined = 0;
  for (const auto& c : result.clustering.clusters) {
    if (c.stats) {
      total += c.stats->conductance;
      ++defined;
    }
  }
  const std::optional<double> mean_phi = defined ? std::optional(total / static_cast<double>(defined)) : std::nullopt;
  std::optional<double> ari;
  if (truth) ari = adjusted_rand_index(clustering_labels(result.clustering, n), *truth);

  const fs::path dir = run.resolve(run.output_dir);

  ojson doc;
  doc["schema_version"] = kConfigSchema;
  doc["provenance"] = {{"tool", "conducta"},
                       {"command", "partition"},
                       {"input", input_path},
                       {"vertices", n},
                       {"edges", g.num_edges()},
                       {"component_size", report.component.size()}};
  doc["seeds"] = {{"pipeline", report.seed}, {"restart_used", report.restart_used}};
  doc["config"] = to_json(run);
  doc["stop_reason"] = report.carving.stop_reason;
  doc["threshold"] = report.carving.threshold;
  ojson clusters = ojson::array();
  for (const auto& c : result.clustering.clusters) clusters.push_back(cluster_json(c));
  doc["clusters"] = clusters;
  doc["unassigned"] = result.clustering.unassigned;
  doc["mean_conductance"] = real_or_null(mean_phi);
  doc["ari"] = real_or_null(ari);
  write_text(dir / "clustering.json", doc.dump(2) + "\n");

  TrainingData training{report.training.inputs, report.training.targets};
  write_file(dir / "training.csv", [&](std::ostream& s) { write_training_csv(s, training, &report.training.vertices); });
  write_file(dir / "predictions.csv", [&](std::ostream& s) {
    s << "vertex,l2norm,mean,variance\n";
    for (std::size_t i = 0; i < report.test_vertices.size(); ++i) {
      const auto v = report.test_vertices[i];
      const auto local = std::lower_bound(report.component.begin(), report.component.end(), v) - report.component.begin();
      const auto k = static_cast<Eigen::Index>(i);
      s << v << ',' << format_real(result.embedding.norms[local]) << ',' << format_real(report.test_mean[k]) << ','
        << format_real(report.test_variance[k]) << '\n';
    }
  });
  if (!result.samples.chains.empty()) {
    write_file(dir / "samples.csv", [&](std::ostream& s) { write_samples_csv(s, result.samples); });
  }

  std::ostringstream r;
  r << "partition report\n"
    << "input: " << input_path << " (" << n << " vertices, " << g.num_edges() << " edges)\n"
    << "component: " << report.component.size() << " of " << n << " vertices\n"
    << "seed: " << report.seed << " (restart " << report.restart_used << ")\n"
    << "references:";
  for (const auto v : report.references.refs) r << ' ' << v;
  r << "\ntraining vertices: " << report.training.vertices.size() << " (skipped " << report.training.skipped.size()
    << ")\n"
    << "test vertices: " << report.test_vertices.size() << '\n'
    << "mode: " << (run.pipeline.exact_mode ? "exact" : "gp") << ", selection " << to_string(run.pipeline.selection)
    << '\n'
    << "threshold: " << format_real(report.carving.threshold) << '\n'
    << "stop reason: " << report.carving.stop_reason << '\n'
    << "clusters: " << result.clustering.clusters.size() << '\n';
  for (std::size_t i = 0; i < result.clustering.clusters.size(); ++i) {
    const auto& c = result.clustering.clusters[i];
    r << "  cluster " << i << ": size " << c.members.size();
    if (c.seed) r << ", seed vertex " << *c.seed;
    if (c.radius) r << ", radius " << format_real(*c.radius);
    if (c.stats) r << ", conductance " << format_real(c.stats->conductance) << ", pi mass " << format_real(c.stats->pi_mass);
    r << '\n';
  }
  r << "unassigned: " << result.clustering.unassigned.size() << '\n'
    << "mean conductance: " << (mean_phi ? format_real(*mean_phi) : "undefined") << '\n';
  if (ari) r << "ARI: " << format_real(*ari) << '\n';
  if (report.diagnostics) {
    const auto& d = *report.diagnostics;
    for (std::size_t p = 0; p < 3; ++p) {
      r << "mcmc " << kParamNames[p] << ": ess " << (d.ess[p] ? format_real(*d.ess[p]) : "n/a") << ", rhat "
        << (d.rhat[p] ? format_real(*d.rhat[p]) : "n/a") << '\n';
    }
    r << "mcmc acceptance:";
    for (const double acc : d.acceptance) r << ' ' << format_real(acc);
    r << '\n';
  }
  for (const auto& w : report.warnings) r << "warning: " << w << '\n';
  write_text(dir / "report.txt", r.str());

  out << r.str();
  return 0;
}

// ---------------------------------------------------------------------------
// plot

struct PlotArgs {
  std::string model;
  std::string samples;
  std::string train;
  std::string points;
  std::size_t subsample = 50;
  std::size_t paths = 0;
  std::optional<std::uint64_t> seed;
  std::string svg;
  std::string csv;
  std::string title = "induced conductance";
};

int cmd_plot(const PlotArgs& a, std::ostream& out) {
  if (a.model.empty() == a.samples.empty()) throw InputError("plot needs exactly one of --model or --samples");
  const auto xstar = load_coordinates(a.points);
  const std::uint64_t seed = resolve_seed(a.seed, 0);
  Eigen::VectorXd norms = xstar.rowwise().norm();
  Eigen::VectorXd mean, variance, train_x, train_y;
  Eigen::MatrixXd paths;

  if (!a.model.empty()) {
    const auto gp = load_model(a.model, a.train);
    const auto pred = gp.predict(xstar, false);
    mean = pred.mean;
    variance = pred.variance;
    train_x = gp.inputs().rowwise().norm();
    train_y = gp.targets_raw();
    if (a.paths > 0) paths = gp.sample_posterior_functions(xstar, a.paths, seed);
  } else {
    if (a.train.empty()) throw InputError("--samples needs --train");
    const auto data = load_training_csv(a.train);
    const auto samples = load_samples_csv(a.samples);
    const auto mix = predictive_mixture(data.inputs, data.targets, samples, xstar, a.subsample);
    mean = mix.mean;
    variance = mix.variance;
    train_x = data.inputs.rowwise().norm();
    train_y = data.targets;
    if (a.paths > 0) {
      // one path per thinned hyperparameter draw
      const auto draws = thin_draws(samples.pooled(), a.paths);
      paths.resize(xstar.rows(), static_cast<Eigen::Index>(draws.size()));
      for (std::size_t k = 0; k < draws.size(); ++k) {
        const auto gp = GpModel::fit(data.inputs, data.targets, draws[k]);
        paths.col(static_cast<Eigen::Index>(k)) = gp.sample_posterior_functions(xstar, 1, seed + k).col(0);
      }
    }
  }

  auto spec = make_plot_spec(norms, mean, variance, paths, train_x, train_y);
  spec.title = a.title;
  write_file(a.svg, [&](std::ostream& s) { write_plot_svg(s, spec); });
  if (!a.csv.empty()) write_file(a.csv, [&](std::ostream& s) { write_plot_csv(s, spec); });
  out << "points " << spec.x.size() << "\npaths " << spec.paths.cols() << '\n';
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian graph partitioning by learned induced conductance", "conducta"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (0: hardware concurrency)")->capture_default_str();

  auto seed_option = [](CLI::App* cmd, std::optional<std::uint64_t>& seed) {
    cmd->add_option("--seed", seed, "RNG seed (overrides CONDUCTA_SEED and config)");
  };

  BuildGraphArgs bg;
  auto* build = app.add_subcommand("build-graph", "Build or canonicalise a weighted graph");
  build->add_option("--points", bg.points, "Point-cloud CSV");
  build->add_option("--edges", bg.edges, "Edge list");
  build->add_option("-k,--k", bg.k, "Neighbours per point")->capture_default_str();
  build->add_option("--weight-mode", bg.weight_mode, "distance, inverse_distance or gaussian")->capture_default_str();
  build->add_option("--sigma", bg.sigma, "Gaussian bandwidth")->capture_default_str();
  build->add_option("-o,--out", bg.out, "Output edge list")->required();

  EmbedArgs em;
  auto* embed = app.add_subcommand("embed", "Distance-to-reference embedding");
  embed->add_option("-g,--graph", em.graph, "Edge list")->required();
  embed->add_option("-r,--refs", em.refs, "Number of reference vertices")->capture_default_str();
  seed_option(embed, em.seed);
  embed->add_option("-o,--out", em.out, "Embedding CSV")->required();
  embed->add_flag("--distortion", em.distortion, "Report empirical distortion");
  embed->add_option("--pairs", em.pairs, "Sampled pairs for distortion on large graphs")->capture_default_str();

  ConductanceArgs co;
  auto* cond = app.add_subcommand("conductance", "Induced conductance ball profiles");
  cond->add_option("-g,--graph", co.graph, "Edge list")->required();
  cond->add_option("--centers", co.centers, "Comma-separated vertex ids or 'all'")->capture_default_str();
  cond->add_option("--radius", co.radius, "Radius bound (default: median distance per center)");
  cond->add_option("--budget", co.budget, "Stationary mass budget")->capture_default_str();
  cond->add_option("-o,--out", co.out, "Profile CSV")->required();

  FitGpArgs fg;
  auto* fit = app.add_subcommand("fit-gp", "Fit a GP to training pairs and save the model");
  fit->add_option("-t,--train", fg.train, "Training CSV")->required();
  fit->add_option("--lengthscale", fg.lengthscale);
  fit->add_option("--signal-var", fg.signal_var);
  fit->add_option("--noise-var", fg.noise_var);
  fit->add_option("--samples", fg.samples, "Use posterior medians from a samples CSV");
  fit->add_flag("--standardize", fg.standardize, "Standardise targets");
  fit->add_option("-o,--out", fg.out, "Model JSON")->required();
  fit->add_option("--points", fg.points, "Embedding CSV to predict at");
  fit->add_option("--predictions", fg.predictions, "Prediction CSV");

  McmcArgs mc;
  auto* mcmc = app.add_subcommand("mcmc", "Metropolis-Hastings over GP hyperparameters");
  mcmc->add_option("-t,--train", mc.train, "Training CSV")->required();
  mcmc->add_option("--steps", mc.steps)->capture_default_str();
  mcmc->add_option("--burn-in", mc.burn_in)->capture_default_str();
  mcmc->add_option("--chains", mc.chains)->capture_default_str();
  mcmc->add_option("--scales", mc.scales, "Proposal std per log-parameter")->expected(3);
  mcmc->add_flag("--no-adapt", mc.no_adapt, "Keep proposal scales fixed during burn-in");
  seed_option(mcmc, mc.seed);
  mcmc->add_flag("--flat-priors", mc.flat_priors, "Flat priors on log-parameters");
  mcmc->add_option("--prior-shape", mc.prior_shape)->capture_default_str();
  mcmc->add_option("--prior-omega", mc.prior_omega)->capture_default_str();
  mcmc->add_option("-o,--out", mc.out, "Samples CSV")->required();
  mcmc->add_option("--diagnostics", mc.diagnostics, "Diagnostics JSON");

  PartitionArgs pa;
  auto* part = app.add_subcommand("partition", "Run the full partitioning pipeline from a JSON config");
  part->add_option("config", pa.config, "Config JSON")->required();
  seed_option(part, pa.seed);
  part->add_option("--output-dir", pa.output_dir, "Override the configured output directory");

  PlotArgs pl;
  auto* plot = app.add_subcommand("plot", "Posterior plot over embedding norms (SVG + CSV)");
  plot->add_option("--model", pl.model, "Model JSON from fit-gp");
  plot->add_option("--samples", pl.samples, "Samples CSV from mcmc");
  plot->add_option("-t,--train", pl.train, "Training CSV (required with --samples)");
  plot->add_option("--points", pl.points, "Embedding CSV with the prediction points")->required();
  plot->add_option("--subsample", pl.subsample, "Hyperparameter draws in the mixture")->capture_default_str();
  plot->add_option("--paths", pl.paths, "Posterior sample paths to draw")->capture_default_str();
  seed_option(plot, pl.seed);
  plot->add_option("--svg", pl.svg, "Output SVG")->required();
  plot->add_option("--csv", pl.csv, "Output CSV of the plotted series");
  plot->add_option("--title", pl.title)->capture_default_str();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    set_max_threads(threads);
    if (build->parsed()) return cmd_build_graph(bg, out, err);
    if (embed->parsed()) return cmd_embed(em, out);
    if (cond->parsed()) return cmd_conductance(co, out);
    if (fit->parsed()) return cmd_fit_gp(fg, out);
    if (mcmc->parsed()) return cmd_mcmc(mc, out);
    if (part->parsed()) return cmd_partition(pa, out, err);
    if (plot->parsed()) return cmd_plot(pl, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace conducta::cli
