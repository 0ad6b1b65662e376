#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aic3/design.hpp"
#include "aic3/simulate.hpp"
#include "aic3/stimulus_prep.hpp"

namespace aic3 {

// Declarative description of a study run, loaded from one JSON file. See the
// README for the schema.
struct PipelineConfig {
  std::filesystem::path out_dir = "run";
  std::uint64_t seed = 0;
  std::vector<std::string> stages{"design", "simulate", "analyze"};
  std::vector<Protocol> protocols{Protocol::btc, Protocol::ptc};

  DesignConfig design = DesignConfig::standard();

  // prep stage
  std::filesystem::path stimuli_in;
  std::filesystem::path stimuli_out;
  BoostConfig boost;

  // simulate stage: either a truth file or a linear truth with a boosting gain.
  std::optional<std::filesystem::path> truth_path;
  double jnd_per_level = 0.25;
  BoostGain gain{2.0, 0.0};
  double not_sure_band = 0.2;
  std::map<Protocol, int> workers{{Protocol::btc, 300}, {Protocol::ptc, 300}};
  ReliabilityMix mix;

  // analyze stage inputs when the earlier stages are not run in this pipeline.
  std::map<Protocol, std::filesystem::path> design_paths;
  std::map<Protocol, std::filesystem::path> response_paths;
  int bootstrap = 1000;
  double threshold = 0.70;
  std::string granularity = "auto";

  static PipelineConfig load(const std::filesystem::path& path);
  static PipelineConfig parse(const std::string& json_text, const std::filesystem::path& base_dir = {});
  // Canonical JSON used for the run id (the output directory is excluded).
  std::string canonical() const;
};

struct PipelineResult {
  std::map<std::string, std::filesystem::path> artifacts;
  std::filesystem::path manifest;
  std::string run_id;
};

// Checks every input path, then runs the stages in order. Failures are rethrown as
// std::runtime_error naming the stage.
PipelineResult run_pipeline(const PipelineConfig& config);

// Recomputes the hashes listed in a run manifest; returns the files that differ.
std::vector<std::string> verify_run(const std::filesystem::path& manifest);

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace aic3
