#include <doctest.h>

#include "hypoinv/experiments.hpp"
#include "oracles.hpp"

using namespace hypoinv;

namespace {

ExperimentConfig small_bayes() {
  ExperimentConfig cfg = default_config(ExperimentMode::bayes);
  cfg.model.n = 64;
  return cfg;
}

}  // namespace

TEST_CASE("slope fit: exact power laws") {
  const auto d = geometric_grid(1e-1, 1e-3, 7);
  std::vector<double> v(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) v[i] = d[i];
  auto f = fit_loglog_slope(d, v);
  CHECK(f.slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.used_rows.size() == 7);

  for (std::size_t i = 0; i < d.size(); ++i) v[i] = 3.0 * std::sqrt(d[i]);
  f = fit_loglog_slope(d, v);
  CHECK(f.slope == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("slope fit drops floor rows") {
  const auto d = geometric_grid(1e-1, 1e-6, 11);
  std::vector<double> v(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) v[i] = std::max(d[i], 1e-4);
  const auto f = fit_loglog_slope(d, v);
  CHECK(f.slope == doctest::Approx(1.0).epsilon(1e-9));
  for (auto r : f.used_rows) CHECK(d[r] >= 1e-4 * (1.0 - 1e-12));
  CHECK(f.used_rows.size() == 7);

  const std::vector<double> flat(d.size(), 1.0);
  CHECK_THROWS_CODE(fit_loglog_slope(d, flat), invalid_argument);
  CHECK_THROWS_CODE(fit_loglog_slope(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), size_mismatch);
}

TEST_CASE("geometric grid endpoints and ratio") {
  const auto g = geometric_grid(1e-1, 1e-3, 5);
  CHECK(g.front() == 1e-1);
  CHECK(g.back() == 1e-3);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == doctest::Approx(std::sqrt(0.1)).epsilon(1e-12));
}

TEST_CASE("config validation") {
  auto cfg = small_bayes();
  CHECK_NOTHROW(cfg.validate());
  cfg.delta_grid = {1e-1, 1e-2, 1e-3};
  CHECK_THROWS_CODE(cfg.validate(), config);
  cfg.delta_grid = {1e-1, 5e-2, 2e-2, 1e-2};
  CHECK_THROWS_CODE(cfg.validate(), config);
  cfg.delta_grid = {1e-1, 1e-2, 1e-2, 1e-3};
  CHECK_THROWS_CODE(cfg.validate(), config);
  cfg = small_bayes();
  cfg.n_replicates = 7;
  CHECK_THROWS_CODE(cfg.validate(), config);
  cfg = small_bayes();
  cfg.model.forward.kind = "nope";
  CHECK_THROWS_CODE(cfg.validate(), config);
  CHECK_THROWS_CODE(parse_mode("bogus"), config);
  CHECK(parse_mode("appendix_b") == ExperimentMode::appendix_b);
}

TEST_CASE("model template orders") {
  ModelTemplate t;
  const auto p = template_params(t);
  CHECK(p.r == 2.0);
  CHECK(p.t == 2.0);
  CHECK(p.t0 == 2.0);
  t.forward = {"heat", 0.0, 0.0};
  const auto h = template_params(t);
  CHECK(h.t == 1.0);
  CHECK(h.t0 == 2.0);
  const auto m = build_model(ModelTemplate{2, 16, {"bessel", -1.0, 0.0}, {"bessel", -2.0, 0.0}, 1.01}, 0.1);
  CHECK(m.prior.r() == 2.0);
  CHECK(m.diagonal());
  const auto v = build_model(ModelTemplate{2, 16, {"variable", -1.0, 0.3}, {"bessel", -2.0, 0.0}, 1.01}, 0.1);
  CHECK_FALSE(v.diagonal());
}

TEST_CASE("hat truth geometry and smoothness") {
  const auto lat = build_lattice(2, 64);
  const auto truth = make_hat_truth(lat);
  const auto grid = inverse_transform(truth.u);
  // Sample (32, 32) sits at (pi, pi); (0, 0) is outside the support.
  CHECK(grid[32 * 64 + 32] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(grid[0]) < 1e-12);
  CHECK(std::abs(grid[5 * 64 + 32]) < 1e-12);
  CHECK(truth.u.hermitian_defect() < 1e-15);
  CHECK(truth.description.find("||u||_H1") != std::string::npos);
  CHECK_THROWS_CODE(make_hat_truth(build_lattice(1, 16)), invalid_argument);

  double h1[3], h2[3], h16[3];
  int i = 0;
  for (int n : {64, 128, 256}) {
    const auto u = make_hat_truth(build_lattice(2, n)).u;
    h1[i] = sobolev_norm(u, 1.0);
    h16[i] = sobolev_norm(u, 1.6);
    h2[i] = sobolev_norm(u, 2.0);
    ++i;
  }
  CHECK(std::abs(h1[1] / h1[0] - 1.0) < 0.02);
  CHECK(std::abs(h1[2] / h1[1] - 1.0) < 0.02);
  CHECK(h2[1] > 1.2 * h2[0]);
  CHECK(h2[2] > 1.2 * h2[1]);
  CHECK(h16[2] > h16[1]);
  CHECK(h16[1] > h16[0]);
}

TEST_CASE("bayes experiment: table shape, decomposition and determinism") {
  auto cfg = small_bayes();
  cfg.delta_grid = geometric_grid(1e-1, 1e-3, 6);
  const RateTable t1 = run_bayes_convergence(cfg);
  CHECK(t1.rows.size() == 12);
  CHECK(t1.dropped == 0);
  for (const auto& r : t1.rows) {
    CHECK(r.n == cfg.n_replicates);
    CHECK(r.mean_error > 0.0);
  }
  for (const auto& d : t1.decomposition) {
    CHECK(d.triangle_ok);
    CHECK(d.total <= d.bias_term + d.noise_term + 1e-15);
  }
  const auto& s = t1.series_for(0.0);
  CHECK(s.fit_ok);
  CHECK(s.prediction.regime == Regime::bayes_ii);
  CHECK(std::abs(s.fit.slope - s.prediction.exponent) < 0.1);

  cfg.threads = 4;
  const RateTable t2 = run_bayes_convergence(cfg);
  REQUIRE(t2.rows.size() == t1.rows.size());
  for (std::size_t i = 0; i < t1.rows.size(); ++i) {
    CHECK(t1.rows[i].mean_error == t2.rows[i].mean_error);
    CHECK(t1.rows[i].std_error == t2.rows[i].std_error);
  }
}

TEST_CASE("bayes experiment out of regime stagnates") {
  auto cfg = small_bayes();
  cfg.zeta_list = {1.5};
  const RateTable t = run_bayes_convergence(cfg);
  CHECK(t.rows.front().regime == Regime::no_convergence);
  CHECK(t.rows.back().mean_error / t.rows.front().mean_error > 0.9);
}

TEST_CASE("frequentist MISE: zero truth matches the analytic noise term") {
  auto cfg = default_config(ExperimentMode::frequentist);
  cfg.model.n = 32;
  cfg.n_replicates = 64;
  const auto lat = build_lattice(2, 32);
  const RateTable t = run_frequentist_convergence(cfg, make_zero_truth(lat));
  for (const auto& row : t.rows) {
    // E ||Z^-1 A* delta E||^2 = sum delta^2 a^2 / (a^2 + delta^2 / c)^2.
    double expect = 0.0;
    for (std::size_t k = 0; k < lat->size(); ++k) {
      const double w = 1.0 + lat->weight(k);
      const double a2 = 1.0 / (w * w), c = 1.0 / (w * w);
      expect += row.delta * row.delta * a2 / ((a2 + row.delta * row.delta / c) * (a2 + row.delta * row.delta / c));
    }
    CHECK(std::abs(row.mean_error - expect) < 5.0 * row.std_error);
  }
}

TEST_CASE("frequentist stderr shrinks like 1/sqrt(n)") {
  auto cfg = default_config(ExperimentMode::frequentist);
  cfg.model.n = 32;
  cfg.n_replicates = 200;
  const auto truth = make_hat_truth(build_lattice(2, 32));
  const RateTable a = run_frequentist_convergence(cfg, truth);
  cfg.n_replicates = 400;
  const RateTable b = run_frequentist_convergence(cfg, truth);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(b.rows[i].n == 400);
    CHECK(b.rows[i].std_error / a.rows[i].std_error == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.2));
  }
}

TEST_CASE("contraction: Markov route ordering and slope") {
  auto cfg = default_config(ExperimentMode::contraction);
  cfg.model.n = 32;
  cfg.n_mc = 100;
  const auto truth = make_hat_truth(build_lattice(2, 32));
  const ContractionTable t = run_contraction(cfg, truth);
  CHECK(t.prediction.exponent == doctest::Approx(0.495));
  CHECK(t.markov_exponent == doctest::Approx(0.295));
  for (const auto& r : t.rows) CHECK(r.direct_prob <= r.markov_bound);
  REQUIRE(t.markov_fit_ok);
  CHECK(std::abs(t.markov_fit.slope - t.markov_exponent) < 0.15);

  cfg.kappa = 0.0;
  cfg.c0 = 100.0;
  const ContractionTable trivial = run_contraction(cfg, truth);
  for (const auto& r : trivial.rows) CHECK(r.direct_prob == 0.0);
  CHECK_FALSE(trivial.direct_fit_ok);
}

TEST_CASE("credible: Markov bound per row and trivial radius") {
  auto cfg = default_config(ExperimentMode::credible);
  cfg.model.n = 32;
  cfg.n_mc = 1000;
  const CredibleTable t = run_credible(cfg);
  CHECK(t.alpha == doctest::Approx(t.prediction.exponent / 4.0));
  for (const auto& r : t.rows) CHECK(r.p <= r.markov_bound);

  // The expected squared norm is the weighted trace of the posterior covariance.
  const auto model = build_model(cfg.model, t.rows.front().delta);
  const PosteriorGaussian post(model, SpectralField::zeros(model.lattice));
  double mc = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double nrm = sobolev_norm(post.sample_deviation(derive_seed(77, i)), cfg.zeta1);
    mc += nrm * nrm;
  }
  CHECK(mc / 2000.0 == doctest::Approx(t.rows.front().expected_sq_norm).epsilon(0.05));

  cfg.alpha = 1e-9;
  cfg.c1 = 1e6;
  const CredibleTable wide = run_credible(cfg);
  for (const auto& r : wide.rows) CHECK(r.p == 0.0);
}

TEST_CASE("deblurring sweep curves are normalised at the smallest delta") {
  auto cfg = default_config(ExperimentMode::appendix_b);
  cfg.model.n = 64;
  const auto res = run_appendix_b(cfg);
  REQUIRE(res.curves.size() == 5);
  REQUIRE(res.bounds.size() == 5);
  for (const auto& c : res.curves) CHECK(c.values.back() == doctest::Approx(1.0).epsilon(1e-14));
  for (const auto& b : res.bounds) CHECK(b.values.back() == doctest::Approx(1.0).epsilon(1e-14));
  const auto& m1 = res.curves.front();
  for (std::size_t i = 1; i < m1.values.size(); ++i) CHECK(m1.values[i] < m1.values[i - 1]);
  CHECK(res.bounds.front().exponent == doctest::Approx((1.0 - 0.01) / 3.0).epsilon(1e-12));
}
