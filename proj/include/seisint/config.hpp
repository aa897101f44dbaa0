#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "seisint/features.hpp"
#include "seisint/geo_grid.hpp"
#include "seisint/model.hpp"

namespace seisint {

/// How the catalog becomes a training set.
struct DataConfig {
  double train_fraction = 1461.0 / 1819.0;
  std::uint64_t split_seed = 1819;
  double min_magnitude = 5.0;

  void validate() const;
  bool operator==(const DataConfig&) const = default;
};

/// Everything needed to reproduce a training run.
struct RunConfig {
  GridSpec grid;
  FeatureConfig features;
  HybridConfig hybrid;
  ModelConfig model;
  TrainingSchedule training;
  DataConfig data;

  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

nlohmann::json to_json(const RunConfig& cfg);

/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& j);

RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical text: sorted keys, two-space indent, trailing newline.
std::string canonical_json(const nlohmann::json& j);

}  // namespace seisint
