#include <doctest.h>

#include <algorithm>

#include "hypoinv/theory_rates.hpp"

using namespace hypoinv;

namespace {

const SmoothnessParams kExample{2.0, 1.01, 2.0, 2.0, 2};

bool has_warning(const RatePrediction& p, const std::string& text) {
  const auto w = p.warnings();
  return std::any_of(w.begin(), w.end(), [&](const std::string& s) { return s.find(text) != std::string::npos; });
}

}  // namespace

TEST_CASE("worked example: case (i) below the split, case (ii) at zeta = 0") {
  CHECK(kExample.tau() == doctest::Approx(0.99));
  for (double z : {-3.01, -3.5, -10.0}) {
    const auto p = bayes_rate(kExample, z);
    CHECK(p.regime == Regime::bayes_i);
    CHECK(std::abs(p.exponent - 1.0) < 1e-12);
  }
  const auto p0 = bayes_rate(kExample, 0.0);
  CHECK(p0.regime == Regime::bayes_ii);
  CHECK(std::abs(p0.exponent - 0.2475) < 1e-12);
  CHECK(p0.hypotheses_ok());
}

TEST_CASE("case (ii) exponent is continuous at the split and vanishes at the upper edge") {
  const SmoothnessParams p{2.5, 1.2, 1.5, 2.0, 2};
  const double split = p.t - p.s - 2.0 * p.t0;
  const double upper = p.tau() - 3.0 * (p.t0 - p.t);
  const double case_i = (2.0 * p.t - p.t0 + p.r) / (p.t0 + p.r);
  CHECK(bayes_case_ii_exponent(p, split) == doctest::Approx(case_i).epsilon(1e-12));
  CHECK(bayes_case_ii_exponent(p, upper) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(bayes_rate(p, split + 0.1).regime == Regime::bayes_ii);
  const auto out = bayes_rate(p, upper);
  CHECK(out.regime == Regime::no_convergence);
  CHECK(out.exponent == 0.0);
  CHECK(bayes_rate(p, upper + 1.0).regime == Regime::no_convergence);
}

TEST_CASE("frequentist exponent reduces to 2 tau / (s + tau + t) for elliptic operators") {
  for (double t : {1.0, 2.0, 3.5}) {
    const SmoothnessParams p{2.0, 1.01, t, t, 2};
    const auto f = frequentist_rate(p);
    CHECK(f.exponent == doctest::Approx(2.0 * p.tau() / (p.s + p.tau() + t)).epsilon(1e-14));
    CHECK(f.regime == Regime::frequentist);
  }
  const auto outside = frequentist_rate({0.5, 1.01, 2.0, 2.0, 2});
  CHECK(outside.regime == Regime::frequentist_outside);
  CHECK(has_warning(outside, "tau = r - s > 0 violated"));
}

TEST_CASE("contraction exponent and probability decay") {
  const auto c = contraction_rate(kExample, 0.1);
  CHECK(c.exponent == doctest::Approx(0.495).epsilon(1e-14));
  REQUIRE(c.secondary.has_value());
  CHECK(*c.secondary == doctest::Approx(2.0 * (0.495 - 0.1)).epsilon(1e-14));
  CHECK(c.regime == Regime::contraction);
  CHECK_FALSE(contraction_rate(kExample).secondary.has_value());
  CHECK(has_warning(contraction_rate(kExample, 0.6), "kappa < kappa0 violated"));
}

TEST_CASE("credible exponents in both cases") {
  // Deblurring model: r = 1, t = t0 = 2, s = 1.01.
  const SmoothnessParams p{1.0, 1.01, 2.0, 2.0, 2};
  const auto ii = credible_rate(p, -3.0);
  CHECK(ii.regime == Regime::credible_ii);
  CHECK(ii.exponent == doctest::Approx(2.0 * (p.tau() + 3.0) / 3.0).epsilon(1e-14));
  const auto i = credible_rate(p, -3.5);
  CHECK(i.regime == Regime::credible_i);
  CHECK(i.exponent == doctest::Approx(2.0).epsilon(1e-14));
  const auto with_alpha = credible_rate(p, -3.0, ii.exponent / 4.0);
  REQUIRE(with_alpha.secondary.has_value());
  CHECK(*with_alpha.secondary == doctest::Approx(ii.exponent / 2.0).epsilon(1e-14));
  CHECK(with_alpha.hypotheses_ok());
  CHECK(credible_rate(p, 0.0).regime == Regime::credible_outside);
  CHECK(has_warning(credible_rate(p, -3.0, ii.exponent), "alpha < gamma/2 violated"));
}

TEST_CASE("hypothesis flags") {
  const SmoothnessParams bad{1.0, 1.01, 1.0, 5.0, 2};
  const auto b = bayes_rate(bad, 0.0);
  CHECK_FALSE(b.hypotheses_ok());
  CHECK(has_warning(b, "t0 < 2t+r violated"));
  const auto noise = bayes_rate({2.0, 0.9, 2.0, 2.0, 2}, 0.0);
  CHECK(has_warning(noise, "s > d/2 violated"));
  CHECK(to_string(Regime::bayes_ii) == "bayes(ii)");
  CHECK(to_string(Regime::no_convergence) == "no-convergence");
}
