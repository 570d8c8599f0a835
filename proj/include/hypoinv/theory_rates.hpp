#pragma once

// Predicted convergence and contraction exponents. Only exponents are
// available; the constants in the bounds are unknown, so experiments compare
// log-log slopes against these numbers.

#include <optional>
#include <string>
#include <vector>

namespace hypoinv {

struct SmoothnessParams {
  double r = 0.0;   ///< prior covariance smoothing half-order
  double s = 0.0;   ///< noise Sobolev index, s > d/2
  double t = 0.0;   ///< forward operator upper decay order
  double t0 = 0.0;  ///< forward operator lower decay order
  int d = 1;

  double tau() const { return r - s; }
};

enum class Regime {
  bayes_i,
  bayes_ii,
  no_convergence,
  frequentist,
  frequentist_outside,
  contraction,
  contraction_outside,
  credible_i,
  credible_ii,
  credible_outside,
};

std::string to_string(Regime regime);

struct HypothesisFlag {
  std::string name;
  bool ok = true;
  std::string message;
};

struct RatePrediction {
  double exponent = 0.0;
  Regime regime = Regime::no_convergence;
  std::vector<HypothesisFlag> hypotheses;
  /// Second exponent where the query defines one: the probability-decay
  /// exponent 2(kappa0 - kappa) for contraction, gamma - 2 alpha for credible.
  std::optional<double> secondary;

  bool hypotheses_ok() const;
  std::vector<std::string> warnings() const;
};

/// Expected H^zeta error of the MAP estimate under the joint prior/noise law.
/// Out-of-regime zeta gives exponent 0 tagged no_convergence.
RatePrediction bayes_rate(const SmoothnessParams& p, double zeta);

/// Exponent of the squared L^2 risk for a fixed truth.
RatePrediction frequentist_rate(const SmoothnessParams& p);

/// kappa0 = 2(tau - 3(t0 - t)) / (t0 + r); with kappa given, secondary holds 2(kappa0 - kappa).
RatePrediction contraction_rate(const SmoothnessParams& p, std::optional<double> kappa = std::nullopt);

/// gamma for the credible-ball bound; with alpha given, secondary holds gamma - 2 alpha.
RatePrediction credible_rate(const SmoothnessParams& p, double zeta1, std::optional<double> alpha = std::nullopt);

/// Unclipped case (ii) exponent -(zeta - tau + 3(t0 - t)) / (t0 + r), used for
/// reference lines outside the convergence regime.
double bayes_case_ii_exponent(const SmoothnessParams& p, double zeta);

}  // namespace hypoinv
