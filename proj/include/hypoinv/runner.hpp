#pragma once

// Orchestration behind the estimate / experiment commands: output directory
// handling, file emission and the run manifest.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hypoinv/experiments.hpp"
#include "hypoinv/theory_rates.hpp"

namespace hypoinv {

struct RunOptions {
  std::string config_path;  ///< empty: defaults
  std::string data_path;    ///< estimate only; overrides the config entry
  std::string out_dir;
  bool force = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

struct RunResult {
  std::vector<std::string> files;  ///< written outputs, manifest last
  std::vector<std::string> warnings;
};

/// MAP estimate, synthesised data (when no data file), posterior trace
/// summary and manifest.
RunResult run_estimate(const RunOptions& opts);

/// Dispatch on cfg.mode. A replicate drop rate of 1% or more is reported as
/// ErrorCode::not_converged after all outputs are written.
RunResult run_experiment(const RunOptions& opts);

/// Plain-text table of exponents, regimes and hypothesis flags for all four
/// rate statements.
std::string rates_report(const SmoothnessParams& p, double zeta, std::optional<double> kappa, double zeta1,
                         std::optional<double> alpha);

/// CSV with the columns experiment,delta,zeta,mean_error,stderr,n,predicted_exponent,regime.
std::string rate_table_csv(const RateTable& table);

}  // namespace hypoinv
