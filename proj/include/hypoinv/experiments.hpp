#pragma once

// Monte Carlo runners that measure empirical rates and compare the fitted
// log-log slopes with the predicted exponents.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hypoinv/posterior.hpp"
#include "hypoinv/theory_rates.hpp"

namespace hypoinv {

enum class ExperimentMode { bayes, frequentist, contraction, credible, appendix_b };

std::string to_string(ExperimentMode mode);
ExperimentMode parse_mode(const std::string& name);

/// kind is one of identity, bessel, heat, variable. `variable` multiplies
/// bessel(order) by phi = 1 + phi_amplitude cos(x_0) and is dense.
struct OperatorSpec {
  std::string kind = "bessel";
  double order = -1.0;
  double phi_amplitude = 0.0;
};

struct ModelTemplate {
  int d = 2;
  int n = 128;
  OperatorSpec forward{"bessel", -1.0, 0.0};
  OperatorSpec prior{"bessel", -2.0, 0.0};
  double s = 1.01;
};

/// Orders are read off the operators: bessel(a) has t = t0 = -2a, a bessel
/// prior of order a gives r = -a.
GaussianModel build_model(const ModelTemplate& tmpl, double delta);
SmoothnessParams template_params(const ModelTemplate& tmpl);

struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::bayes;
  ModelTemplate model;
  std::vector<double> delta_grid;
  std::vector<double> zeta_list{0.0};
  int n_replicates = 16;
  std::uint64_t master_seed = 1;
  std::vector<int> lattice_sizes;
  std::string truth = "hat";  ///< hat | zero
  // contraction
  double kappa = 0.1;
  double c0 = 1.0;
  // credible; alpha <= 0 selects gamma / 4
  double zeta1 = -3.0;
  double alpha = 0.0;
  double c1 = 1.0;
  std::size_t n_mc = 2000;

  double slope_tolerance = 0.15;
  double saturation_threshold = 0.02;
  int threads = 1;

  /// Throws ErrorCode::config: delta grid strictly decreasing with at least
  /// 4 points over 1.5 decades, at least 8 replicates.
  void validate() const;
};

/// `count` points from start down to stop, geometric.
std::vector<double> geometric_grid(double start, double stop, int count);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::vector<std::size_t> used_rows;
};

/// Least squares on (log delta, log value). Rows with non-positive values
/// and rows whose value moved by less than `saturation_threshold` (relative)
/// from the previous row are dropped as lattice-floor rows. Throws
/// ErrorCode::invalid_argument with fewer than 3 usable rows.
SlopeFit fit_loglog_slope(std::span<const double> deltas, std::span<const double> values,
                          double saturation_threshold = 0.02);

struct RateRow {
  double delta = 0.0;
  double zeta = 0.0;
  double mean_error = 0.0;
  double std_error = 0.0;
  int n = 0;
  double predicted_exponent = 0.0;
  Regime regime = Regime::no_convergence;
  bool used_in_fit = false;
};

struct RateSeries {
  double zeta = 0.0;
  SlopeFit fit;
  bool fit_ok = false;
  std::string fit_error;
  RatePrediction prediction;
};

/// Per-delta means of the two parts of U_delta - U: the prior-driven bias
/// -delta^2 Z^-1 C_U^-1 U and the noise term Z^-1 A* (delta E).
struct DecompositionRow {
  double delta = 0.0;
  double zeta = 0.0;
  double bias_term = 0.0;
  double noise_term = 0.0;
  double total = 0.0;
  bool triangle_ok = true;  ///< total <= bias + noise for every replicate
};

struct RateTable {
  std::string experiment;
  std::vector<RateRow> rows;
  std::vector<RateSeries> series;
  std::vector<DecompositionRow> decomposition;
  int attempted = 0;
  int dropped = 0;
  std::vector<std::string> warnings;

  const RateSeries& series_for(double zeta) const;
};

struct TruthField {
  SpectralField u;
  std::string description;
};

/// u(x, y) = h(x) h(y), h a centred triangular bump of half-width pi/2 and
/// height 1, sampled on the grid.
TruthField make_hat_truth(const LatticePtr& lattice);
TruthField make_zero_truth(const LatticePtr& lattice);
TruthField make_truth(const std::string& kind, const LatticePtr& lattice);

RateTable run_bayes_convergence(const ExperimentConfig& cfg);

/// Squared L^2 error (MISE) per delta, zeta column 0.
RateTable run_frequentist_convergence(const ExperimentConfig& cfg, const TruthField& truth);

struct ContractionRow {
  double delta = 0.0;
  double radius = 0.0;
  double trace = 0.0;
  double mise = 0.0;
  double markov_bound = 0.0;  ///< (Tr C_delta + MISE) / radius^2
  double direct_prob = 0.0;   ///< nested Monte Carlo estimate
  double direct_std_error = 0.0;
};

struct ContractionTable {
  std::vector<ContractionRow> rows;
  RatePrediction prediction;  ///< exponent kappa0, secondary 2(kappa0 - kappa)
  double markov_exponent = 0.0;  ///< decay exponent implied by the Markov route, kappa0 - 2 kappa
  SlopeFit markov_fit;
  bool markov_fit_ok = false;
  SlopeFit direct_fit;
  bool direct_fit_ok = false;
  std::vector<std::string> warnings;
};

ContractionTable run_contraction(const ExperimentConfig& cfg, const TruthField& truth);

struct CredibleRow {
  double delta = 0.0;
  double radius = 0.0;
  double p = 0.0;  ///< 1 - mu_delta(ball)
  double std_error = 0.0;
  double expected_sq_norm = 0.0;  ///< E ||W||^2_{H^zeta1}
  double markov_bound = 0.0;
};

struct CredibleTable {
  std::vector<CredibleRow> rows;
  double alpha = 0.0;
  RatePrediction prediction;  ///< exponent gamma, secondary gamma - 2 alpha
  SlopeFit fit;
  bool fit_ok = false;
  std::string fit_error;
  std::vector<std::string> warnings;
};

CredibleTable run_credible(const ExperimentConfig& cfg);

struct Curve {
  double zeta = 0.0;
  double exponent = 0.0;  ///< reference bounds only
  std::vector<double> deltas;
  std::vector<double> values;
};

struct AppendixBResult {
  std::vector<Curve> curves;  ///< c(zeta) ||u - u_delta||_{H^zeta}
  std::vector<Curve> bounds;  ///< delta^exponent normalised at the last delta
  std::vector<std::string> warnings;
};

/// Noiseless deblurring sweep; every curve is normalised to 1 at the last
/// (smallest) delta of the grid.
AppendixBResult run_appendix_b(const ExperimentConfig& cfg);

/// Default configuration for each mode.
ExperimentConfig default_config(ExperimentMode mode);

}  // namespace hypoinv
