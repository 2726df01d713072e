#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "conducta/pipeline.hpp"

namespace conducta::cli {

inline constexpr int kConfigSchema = 1;

/// Partition run: PipelineConfig plus inputs and the output directory.
/// Relative paths are resolved against the directory of the config file;
/// the strings as written are kept for the config echo.
struct RunConfig {
  std::string edges;   // edge-list input, or
  std::string points;  // point-cloud input (kNN graph built with pipeline.knn_k)
  std::string labels;  // optional ground truth, one integer per vertex
  std::string output_dir = "partition_out";
  std::filesystem::path base_dir;
  PipelineConfig pipeline;

  std::filesystem::path resolve(const std::string& p) const;
  /// Input files exist and the output directory is creatable.
  void validate_paths() const;
};

/// Parses and checks a config document. Unknown keys are rejected.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Fully resolved config with every default filled in.
nlohmann::ordered_json to_json(const RunConfig& cfg);

}  // namespace conducta::cli
