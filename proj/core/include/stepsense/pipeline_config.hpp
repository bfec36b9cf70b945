#pragma once

#include <filesystem>
#include <string>

#include "stepsense/harness.hpp"
#include "stepsense/preprocess.hpp"
#include "stepsense/synth.hpp"

namespace stepsense {

/// One self-describing JSON document for the whole pipeline. Missing
/// keys take the defaults below (the published parameter values);
/// unknown keys are rejected with their full path.
struct PipelineConfig {
  int schema_version = 1;
  std::uint64_t seed = 0;

  CorpusConfig corpus;
  SegmentationOptions segmentation;
  FeatureConfig features;
  NetworkConfig network;
  TrainOptions training;

  bool pruning_enabled = true;
  PruningSchedule pruning;

  bool personalized = true;
  int personalize_epochs = 10;
  double gsi_epsilon = 1e-9;
  double target_seconds = 60.0;

  std::string scenario = "B";
  std::string feature_set = "combined";
  std::vector<std::string> target_persons;
  double trajectory_seconds = 12.0;

  int extract_threads = 0;  // 0 = hardware concurrency

  /// Throws Error(Config) on out-of-range values.
  void validate() const;

  StudyOptions study_options() const;

  /// FNV-1a hash (hex) of the canonical serialization; embedded in every
  /// output artifact so mixed-config inputs can be detected.
  std::string fingerprint() const;
};

/// Canonical (sorted-key) JSON serialization.
std::string pipeline_config_json(const PipelineConfig& config);

/// Parses JSON text; `where` names the source for error messages.
PipelineConfig pipeline_config_from_json(const std::string& text,
                                         const std::string& where);

PipelineConfig load_pipeline_config(const std::filesystem::path& path);
void save_pipeline_config(const PipelineConfig& config,
                          const std::filesystem::path& path);

}  // namespace stepsense
