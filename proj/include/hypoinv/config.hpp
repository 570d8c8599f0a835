#pragma once

// JSON run configuration. Sections missing from the file keep the defaults
// of the selected mode; unknown keys are rejected. Errors carry the line of
// the offending key.

#include <cstdint>
#include <optional>
#include <string>

#include "hypoinv/experiments.hpp"

namespace hypoinv {

struct EstimateConfig {
  ModelTemplate model{2, 32, {"bessel", -1.0, 0.0}, {"bessel", -2.0, 0.0}, 1.01};
  double delta = 1e-2;
  std::uint64_t seed = 1;
  std::string synth = "prior";  ///< prior | hat | zero: source of U when no data file is given
  std::string data_path;
  double trace_index = 0.0;  ///< posterior trace is taken on H^trace_index
};

struct RunConfig {
  ExperimentConfig experiment = default_config(ExperimentMode::bayes);
  EstimateConfig estimate;
};

/// Throws ErrorCode::config with "line N: ..." messages.
RunConfig parse_config(const std::string& text);

std::string read_text_file(const std::string& path);

/// Config echo for manifests.
std::string config_to_json(const RunConfig& cfg, int indent = 2);

/// Flag values override the file; a seed sets both the experiment master
/// seed and the estimate seed.
void apply_overrides(RunConfig& cfg, std::optional<std::uint64_t> seed, std::optional<int> threads);

}  // namespace hypoinv
