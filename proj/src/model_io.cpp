#include "conducta/model_io.hpp"

#include <bit>
#include <cstring>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

#include "conducta/error.hpp"
#include "conducta/io.hpp"

namespace conducta {

namespace {

constexpr int kModelSchema = 1;

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

}  // namespace

TrainingData load_training_csv(const std::filesystem::path& path) {
  const auto table = load_numeric_csv(path);
  const auto& values = table.values;
  if (values.rows() == 0) throw InputError(path.string() + ": training file has no rows");
  if (values.cols() < 2) throw InputError(path.string() + ": training file needs input columns and a target column");

  std::vector<Eigen::Index> input_cols;
  Eigen::Index target_col = values.cols() - 1;
  if (!table.header.empty()) {
    target_col = -1;
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const auto& name = table.header[static_cast<std::size_t>(c)];
      if (name == "conductance" || name == "target") target_col = c;
    }
    if (target_col < 0) target_col = values.cols() - 1;
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const auto& name = table.header[static_cast<std::size_t>(c)];
      if (c != target_col && name != "vertex" && name != "radius") input_cols.push_back(c);
    }
  } else {
    for (Eigen::Index c = 0; c + 1 < values.cols(); ++c) input_cols.push_back(c);
  }
  if (input_cols.empty()) throw InputError(path.string() + ": training file has no input columns");

  TrainingData out;
  out.inputs.resize(values.rows(), static_cast<Eigen::Index>(input_cols.size()));
  for (std::size_t j = 0; j < input_cols.size(); ++j) out.inputs.col(static_cast<Eigen::Index>(j)) = values.col(input_cols[j]);
  out.targets = values.col(target_col);
  return out;
}

void write_training_csv(std::ostream& out, const TrainingData& data, const std::vector<std::size_t>* vertices) {
  if (vertices) out << "vertex,";
  for (Eigen::Index c = 0; c < data.inputs.cols(); ++c) out << 'c' << c << ',';
  out << "conductance\n";
  for (Eigen::Index i = 0; i < data.inputs.rows(); ++i) {
    if (vertices) out << (*vertices)[static_cast<std::size_t>(i)] << ',';
    for (Eigen::Index c = 0; c < data.inputs.cols(); ++c) out << format_real(data.inputs(i, c)) << ',';
    out << format_real(data.targets[i]) << '\n';
  }
}

std::uint64_t training_checksum(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto feed = [&](double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  };
  for (Eigen::Index i = 0; i < inputs.rows(); ++i)
    for (Eigen::Index j = 0; j < inputs.cols(); ++j) feed(inputs(i, j));
  for (Eigen::Index i = 0; i < targets.size(); ++i) feed(targets[i]);
  return h;
}

void write_model_json(std::ostream& out, const ModelFile& model) {
  nlohmann::ordered_json j;
  j["schema_version"] = kModelSchema;
  j["kind"] = "gp_model";
  j["kernel"] = "squared_exponential";
  j["hyperparameters"] = {{"lengthscale", model.hyperparams.lengthscale},
                          {"signal_var", model.hyperparams.signal_var},
                          {"noise_var", model.hyperparams.noise_var}};
  j["standardize"] = model.standardize;
  j["n"] = model.n;
  j["dim"] = model.dim;
  j["training_checksum"] = "fnv1a64:" + hex64(model.checksum);
  j["training_file"] = model.training_file;
  out << j.dump(2) << '\n';
}

ModelFile read_model_json(const std::filesystem::path& path) {
  auto in = open_input(path);
  nlohmann::json j;
  try {
    in >> j;
    if (j.at("schema_version").get<int>() != kModelSchema) {
      throw InputError(path.string() + ": unsupported model schema_version");
    }
    ModelFile m;
    const auto& hp = j.at("hyperparameters");
    m.hyperparams.lengthscale = hp.at("lengthscale").get<double>();
    m.hyperparams.signal_var = hp.at("signal_var").get<double>();
    m.hyperparams.noise_var = hp.at("noise_var").get<double>();
    m.hyperparams.validate();
    m.standardize = j.value("standardize", false);
    m.n = j.at("n").get<std::size_t>();
    m.dim = j.at("dim").get<std::size_t>();
    const auto sum = j.at("training_checksum").get<std::string>();
    if (sum.rfind("fnv1a64:", 0) != 0) throw InputError(path.string() + ": unknown checksum format");
    m.checksum = std::stoull(sum.substr(8), nullptr, 16);
    m.training_file = j.at("training_file").get<std::string>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": malformed model file: " + e.what());
  }
}

GpModel load_model(const std::filesystem::path& path, const std::filesystem::path& training_override) {
  const auto m = read_model_json(path);
  std::filesystem::path training = training_override;
  if (training.empty()) {
    training = m.training_file;
    if (training.is_relative()) training = path.parent_path() / training;
  }
  auto data = load_training_csv(training);
  if (static_cast<std::size_t>(data.inputs.rows()) != m.n || static_cast<std::size_t>(data.inputs.cols()) != m.dim) {
    throw InputError(training.string() + ": training data shape does not match the model");
  }
  if (training_checksum(data.inputs, data.targets) != m.checksum) {
    throw InputError(training.string() + ": training data checksum does not match the model");
  }
  return GpModel::fit(std::move(data.inputs), std::move(data.targets), m.hyperparams, {m.standardize});
}

PosteriorSamples load_samples_csv(const std::filesystem::path& path) {
  const auto table = load_numeric_csv(path);
  const std::vector<std::string> expected{"chain", "step", "lengthscale", "signal_var", "noise_var",
                                          "log_posterior", "accepted"};
  if (table.header != expected) throw InputError(path.string() + ": not a samples file (unexpected header)");
  std::map<long long, HyperChain> chains;
  PosteriorSamples out;
  bool first = true;
  for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
    const auto row = table.values.row(i);
    auto& chain = chains[static_cast<long long>(row[0])];
    if (first) {
      out.burn_in = static_cast<std::size_t>(row[1]);
      first = false;
    }
    chain.draws.push_back({row[2], row[3], row[4]});
    chain.log_posterior.push_back(row[5]);
    chain.accepted.push_back(row[6] != 0.0);
  }
  if (chains.empty()) throw InputError(path.string() + ": samples file has no rows");
  for (auto& [_, chain] : chains) {
    std::size_t acc = 0;
    for (char a : chain.accepted) acc += a ? 1 : 0;
    chain.acceptance_rate = static_cast<double>(acc) / static_cast<double>(chain.accepted.size());
    out.chains.push_back(std::move(chain));
  }
  return out;
}

}  // namespace conducta
