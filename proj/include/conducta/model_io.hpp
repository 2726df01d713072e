#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "conducta/gp.hpp"
#include "conducta/mcmc.hpp"

namespace conducta {

/// Training pairs: embedding coordinates and the induced conductance target.
struct TrainingData {
  Eigen::MatrixXd inputs;
  Eigen::VectorXd targets;
};

/// Reads a training CSV. With a header, columns named "vertex" and "radius"
/// are ignored and the target is the column named "conductance" or "target";
/// otherwise the last column is the target and the rest are inputs.
TrainingData load_training_csv(const std::filesystem::path& path);

/// CSV: c0..c{r-1},conductance (prefixed by a vertex column when ids given).
void write_training_csv(std::ostream& out, const TrainingData& data, const std::vector<std::size_t>* vertices = nullptr);

/// FNV-1a over the little-endian bytes of inputs (row-major) then targets.
std::uint64_t training_checksum(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets);

/// Serialized GP: hyperparameters, N, dim and a checksum of the training
/// data. The factorization is recomputed from the training file on load.
struct ModelFile {
  Hyperparams<> hyperparams;
  bool standardize = false;
  std::size_t n = 0;
  std::size_t dim = 0;
  std::uint64_t checksum = 0;
  std::string training_file;  // as written; resolved against the model's directory
};

void write_model_json(std::ostream& out, const ModelFile& model);
ModelFile read_model_json(const std::filesystem::path& path);

/// Loads the model's training file and refits. Throws InputError when the
/// training data no longer matches the recorded size or checksum.
GpModel load_model(const std::filesystem::path& path, const std::filesystem::path& training_override = {});

/// Reads a samples CSV written by write_samples_csv.
PosteriorSamples load_samples_csv(const std::filesystem::path& path);

}  // namespace conducta
