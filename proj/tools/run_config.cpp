#include "run_config.hpp"

#include <set>

#include "conducta/error.hpp"
#include "conducta/io.hpp"

namespace conducta::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  if (!obj.is_object()) throw InputError("config: '" + where + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!known.count(key)) throw InputError("config: unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& dst) {
  if (!obj.contains(key)) return;
  try {
    dst = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError(std::string("config: bad value for '") + key + "'");
  }
}

template <typename T>
void read_optional(const json& obj, const char* key, std::optional<T>& dst) {
  if (!obj.contains(key)) return;
  if (obj.at(key).is_null()) {
    dst.reset();
    return;
  }
  T value{};
  read(obj, key, value);
  dst = value;
}

std::size_t read_count(const json& obj, const char* key, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw InputError(std::string("config: '") + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::optional<GammaPrecisionPrior> read_prior(const json& obj, const char* key,
                                              std::optional<GammaPrecisionPrior> fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& p = obj.at(key);
  if (p.is_null()) return std::nullopt;
  reject_unknown(p, {"shape", "omega"}, std::string("priors.") + key);
  GammaPrecisionPrior prior;
  read(p, "shape", prior.shape);
  read(p, "omega", prior.omega);
  prior.validate();
  return prior;
}

nlohmann::ordered_json prior_json(const std::optional<GammaPrecisionPrior>& p) {
  if (!p) return nullptr;
  return {{"shape", p->shape}, {"omega", p->omega}};
}

}  // namespace

std::filesystem::path RunConfig::resolve(const std::string& p) const {
  std::filesystem::path path(p);
  return path.is_relative() ? base_dir / path : path;
}

void RunConfig::validate_paths() const {
  for (const auto* p : {&edges, &points, &labels}) {
    if (p->empty()) continue;
    const auto path = resolve(*p);
    if (!std::filesystem::is_regular_file(path)) throw InputError("cannot open input file: " + path.string());
  }
  const auto out = resolve(output_dir);
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec || !std::filesystem::is_directory(out)) throw InputError("cannot create output directory: " + out.string());
}

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
  reject_unknown(doc, {"schema_version", "input", "labels", "output_dir", "seed", "pipeline"}, "config");
  if (!doc.contains("schema_version") || !doc.at("schema_version").is_number_integer()) {
    throw InputError("config: missing integer schema_version");
  }
  if (doc.at("schema_version").get<int>() != kConfigSchema) {
    throw InputError("config: unsupported schema_version " + doc.at("schema_version").dump());
  }

  RunConfig cfg;
  cfg.base_dir = base_dir;
  auto& pc = cfg.pipeline;

  if (!doc.contains("input")) throw InputError("config: missing 'input'");
  const auto& in = doc.at("input");
  reject_unknown(in, {"edges", "points", "k", "weight_mode", "sigma"}, "input");
  read(in, "edges", cfg.edges);
  read(in, "points", cfg.points);
  if (cfg.edges.empty() == cfg.points.empty()) throw InputError("config: input needs exactly one of 'edges' or 'points'");
  pc.knn_k = read_count(in, "k", pc.knn_k);
  if (in.contains("weight_mode")) pc.weighting.mode = parse_weight_mode(in.at("weight_mode").get<std::string>());
  read(in, "sigma", pc.weighting.sigma);
  if (!(pc.weighting.sigma > 0.0)) throw InputError("config: sigma must be positive");

  read(doc, "labels", cfg.labels);
  read(doc, "output_dir", cfg.output_dir);
  if (doc.contains("seed")) {
    const auto& s = doc.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      throw InputError("config: seed must be a non-negative integer");
    }
    pc.seed = s.get<std::uint64_t>();
  }

  if (doc.contains("pipeline")) {
    const auto& p = doc.at("pipeline");
    reject_unknown(p,
                   {"r_refs", "max_radius", "mass_budget", "n_train", "n_test", "selection", "remainder", "exact_mode",
                    "restarts", "mixture_subsample", "stop", "mcmc", "priors"},
                   "pipeline");
    pc.r_refs = read_count(p, "r_refs", pc.r_refs);
    read_optional(p, "max_radius", pc.max_radius);
    read(p, "mass_budget", pc.mass_budget);
    if (p.contains("n_train")) {
      if (p.at("n_train").is_null()) pc.n_train.reset();
      else pc.n_train = read_count(p, "n_train", 0);
    }
    pc.n_test = read_count(p, "n_test", pc.n_test);
    if (p.contains("selection")) pc.selection = parse_selection(p.at("selection").get<std::string>());
    if (p.contains("remainder")) pc.remainder = parse_remainder_policy(p.at("remainder").get<std::string>());
    read(p, "exact_mode", pc.exact_mode);
    pc.restarts = read_count(p, "restarts", pc.restarts);
    pc.mixture_subsample = read_count(p, "mixture_subsample", pc.mixture_subsample);

    if (p.contains("stop")) {
      const auto& s = p.at("stop");
      reject_unknown(s, {"max_clusters", "min_remaining_mass", "threshold_fraction"}, "pipeline.stop");
      pc.stop.max_clusters = read_count(s, "max_clusters", pc.stop.max_clusters);
      read_optional(s, "min_remaining_mass", pc.stop.min_remaining_mass);
      read(s, "threshold_fraction", pc.stop.threshold_fraction);
    }
    if (p.contains("mcmc")) {
      const auto& m = p.at("mcmc");
      reject_unknown(m, {"steps", "burn_in", "chains", "proposal_scales", "adapt"}, "pipeline.mcmc");
      pc.mh.steps = read_count(m, "steps", pc.mh.steps);
      pc.mh.burn_in = read_count(m, "burn_in", pc.mh.burn_in);
      pc.mh.chains = read_count(m, "chains", pc.mh.chains);
      read(m, "proposal_scales", pc.mh.proposal_scales);
      read(m, "adapt", pc.mh.adapt);
    }
    if (p.contains("priors")) {
      const auto& pr = p.at("priors");
      reject_unknown(pr, {"lengthscale", "signal_var", "noise_var"}, "pipeline.priors");
      pc.priors.lengthscale = read_prior(pr, "lengthscale", pc.priors.lengthscale);
      pc.priors.signal_var = read_prior(pr, "signal_var", pc.priors.signal_var);
      pc.priors.noise_var = read_prior(pr, "noise_var", pc.priors.noise_var);
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  auto in = open_input(path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": invalid JSON: " + e.what());
  }
  return parse_run_config(doc, path.parent_path());
}

nlohmann::ordered_json to_json(const RunConfig& cfg) {
  const auto& pc = cfg.pipeline;
  nlohmann::ordered_json input;
  if (!cfg.edges.empty()) {
    input["edges"] = cfg.edges;
  } else {
    input["points"] = cfg.points;
    input["k"] = pc.knn_k;
    input["weight_mode"] = to_string(pc.weighting.mode);
    input["sigma"] = pc.weighting.sigma;
  }
  nlohmann::ordered_json j;
  j["schema_version"] = kConfigSchema;
  j["input"] = input;
  j["labels"] = cfg.labels.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(cfg.labels);
  j["output_dir"] = cfg.output_dir;
  j["seed"] = pc.seed;
  nlohmann::ordered_json p;
  p["r_refs"] = pc.r_refs;
  p["max_radius"] = pc.max_radius ? nlohmann::ordered_json(*pc.max_radius) : nlohmann::ordered_json(nullptr);
  p["mass_budget"] = pc.mass_budget;
  p["n_train"] = pc.n_train ? nlohmann::ordered_json(*pc.n_train) : nlohmann::ordered_json(nullptr);
  p["n_test"] = pc.n_test;
  p["selection"] = to_string(pc.selection);
  p["remainder"] = to_string(pc.remainder);
  p["exact_mode"] = pc.exact_mode;
  p["restarts"] = pc.restarts;
  p["mixture_subsample"] = pc.mixture_subsample;
  p["stop"] = {{"max_clusters", pc.stop.max_clusters},
               {"min_remaining_mass", pc.stop.min_remaining_mass ? nlohmann::ordered_json(*pc.stop.min_remaining_mass) : nlohmann::ordered_json(nullptr)},
               {"threshold_fraction", pc.stop.threshold_fraction}};
  p["mcmc"] = {{"steps", pc.mh.steps},
               {"burn_in", pc.mh.burn_in},
               {"chains", pc.mh.chains},
               {"proposal_scales", pc.mh.proposal_scales},
               {"adapt", pc.mh.adapt}};
  p["priors"] = {{"lengthscale", prior_json(pc.priors.lengthscale)},
                 {"signal_var", prior_json(pc.priors.signal_var)},
                 {"noise_var", prior_json(pc.priors.noise_var)}};
  j["pipeline"] = p;
  return j;
}

}  // namespace conducta::cli
