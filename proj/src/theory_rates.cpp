#include "hypoinv/theory_rates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hypoinv/error.hpp"

namespace hypoinv {

namespace {

// Regime thresholds are compared with a little slack so that parameters
// typed as decimals land on the intended side of a boundary.
constexpr double kEdge = 1e-12;

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void add_flag(std::vector<HypothesisFlag>& flags, std::string name, bool ok, std::string message) {
  flags.push_back({std::move(name), ok, ok ? std::string() : std::move(message)});
}

void check_params(const SmoothnessParams& p) {
  if (p.d < 1 || p.d > 3) throw Error(ErrorCode::invalid_argument, "d must be 1, 2 or 3");
  for (double v : {p.r, p.s, p.t, p.t0})
    if (!std::isfinite(v)) throw Error(ErrorCode::invalid_argument, "smoothness parameters must be finite");
  if (p.t0 + p.r <= 0.0) throw Error(ErrorCode::invalid_argument, "t0 + r must be positive");
}

std::vector<HypothesisFlag> common_flags(const SmoothnessParams& p) {
  check_params(p);
  std::vector<HypothesisFlag> flags;
  const double lower = std::max(0.0, -p.tau() + p.s);
  add_flag(flags, "t > max{0, s - tau}", p.t > lower,
           "t > max{0, s - tau} violated (t = " + fmt(p.t) + ", bound " + fmt(lower) + ")");
  add_flag(flags, "t <= t0", p.t <= p.t0 + kEdge, "t <= t0 violated");
  add_flag(flags, "s > d/2", p.s > 0.5 * p.d, "s > d/2 violated (white noise not in H^-s)");
  return flags;
}

}  // namespace

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::bayes_i: return "bayes(i)";
    case Regime::bayes_ii: return "bayes(ii)";
    case Regime::no_convergence: return "no-convergence";
    case Regime::frequentist: return "frequentist";
    case Regime::frequentist_outside: return "frequentist-outside";
    case Regime::contraction: return "contraction";
    case Regime::contraction_outside: return "contraction-outside";
    case Regime::credible_i: return "credible(i)";
    case Regime::credible_ii: return "credible(ii)";
    case Regime::credible_outside: return "credible-outside";
  }
  return "unknown";
}

bool RatePrediction::hypotheses_ok() const {
  return std::all_of(hypotheses.begin(), hypotheses.end(), [](const HypothesisFlag& f) { return f.ok; });
}

std::vector<std::string> RatePrediction::warnings() const {
  std::vector<std::string> out;
  for (const auto& f : hypotheses)
    if (!f.ok) out.push_back(f.message);
  return out;
}

double bayes_case_ii_exponent(const SmoothnessParams& p, double zeta) {
  return -(zeta - p.tau() + 3.0 * (p.t0 - p.t)) / (p.t0 + p.r);
}

RatePrediction bayes_rate(const SmoothnessParams& p, double zeta) {
  RatePrediction out;
  out.hypotheses = common_flags(p);
  add_flag(out.hypotheses, "t0 < 2t+r", p.t0 < 2.0 * p.t + p.r, "t0 < 2t+r violated");

  const double upper = p.tau() - 3.0 * (p.t0 - p.t);
  const double split = p.t - p.s - 2.0 * p.t0;
  if (zeta >= upper - kEdge) {
    out.regime = Regime::no_convergence;
    out.exponent = 0.0;
  } else if (zeta <= split + kEdge) {
    out.regime = Regime::bayes_i;
    out.exponent = (2.0 * p.t - p.t0 + p.r) / (p.t0 + p.r);
  } else {
    out.regime = Regime::bayes_ii;
    out.exponent = bayes_case_ii_exponent(p, zeta);
  }
  return out;
}

RatePrediction frequentist_rate(const SmoothnessParams& p) {
  RatePrediction out;
  out.hypotheses = common_flags(p);
  add_flag(out.hypotheses, "tau > 0", p.tau() > 0.0, "tau = r - s > 0 violated");
  add_flag(out.hypotheses, "t0 <= t + tau/3", p.t0 <= p.t + p.tau() / 3.0 + kEdge, "t0 <= t + tau/3 violated");
  out.exponent = 2.0 * (p.tau() - 3.0 * (p.t0 - p.t)) / (p.t0 + p.r);
  out.regime = out.hypotheses_ok() ? Regime::frequentist : Regime::frequentist_outside;
  return out;
}

RatePrediction contraction_rate(const SmoothnessParams& p, std::optional<double> kappa) {
  RatePrediction out = frequentist_rate(p);
  out.regime = out.hypotheses_ok() ? Regime::contraction : Regime::contraction_outside;
  if (kappa) {
    add_flag(out.hypotheses, "kappa < kappa0", *kappa < out.exponent, "kappa < kappa0 violated");
    out.secondary = 2.0 * (out.exponent - *kappa);
  }
  return out;
}

RatePrediction credible_rate(const SmoothnessParams& p, double zeta1, std::optional<double> alpha) {
  RatePrediction out;
  out.hypotheses = common_flags(p);
  add_flag(out.hypotheses, "t0 < 2t+r", p.t0 < 2.0 * p.t + p.r, "t0 < 2t+r violated");

  const double upper = p.tau() + p.t - p.t0;
  const double split = -p.s - p.t0;
  if (zeta1 >= upper - kEdge) {
    out.regime = Regime::credible_outside;
    out.exponent = 0.0;
  } else if (zeta1 <= split + kEdge) {
    out.regime = Regime::credible_i;
    out.exponent = 2.0 * (p.t + p.r) / (p.t0 + p.r);
  } else {
    out.regime = Regime::credible_ii;
    out.exponent = 2.0 * (p.tau() + p.t - p.t0 - zeta1) / (p.t0 + p.r);
  }
  if (alpha) {
    add_flag(out.hypotheses, "alpha < gamma/2", *alpha < 0.5 * out.exponent, "alpha < gamma/2 violated");
    out.secondary = out.exponent - 2.0 * *alpha;
  }
  return out;
}

}  // namespace hypoinv
