#include <doctest.h>

#include "hypoinv/posterior.hpp"
#include "oracles.hpp"

using namespace hypoinv;

namespace {

GaussianModel bessel_model(int d, int n, double delta, double a = -1.0, double c = -2.0) {
  const auto lat = build_lattice(d, n);
  return {lat, bessel_op(a), GaussianPrior::from_multiplier(bessel_op(c), -c, lat), 1.01, delta};
}

/// Real grid-space matrix of a multiplier: column j is the operator applied
/// to the j-th unit sample.
Eigen::MatrixXd grid_matrix(const OperatorHandle& op, const LatticePtr& lat) {
  const auto n = static_cast<Eigen::Index>(lat->size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    std::vector<double> e(lat->size(), 0.0);
    e[static_cast<std::size_t>(j)] = 1.0;
    const auto col = inverse_transform(apply(op, forward_transform(lat, e)));
    for (Eigen::Index i = 0; i < n; ++i) m(i, j) = col[static_cast<std::size_t>(i)];
  }
  return m;
}

double max_diff(const SpectralField& a, const SpectralField& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  return worst;
}

}  // namespace

TEST_CASE("diagonal MAP estimate agrees with the discrete normal equations") {
  const auto model = bessel_model(1, 16, 0.05);
  const auto m_grid = oracle::random_grid(16, 8);
  const auto m = forward_transform(model.lattice, m_grid);
  const auto u = map_estimate(model, m);

  const Eigen::MatrixXd a = grid_matrix(model.forward, model.lattice);
  const Eigen::MatrixXd c = grid_matrix(model.prior.cov(), model.lattice);
  const Eigen::VectorXd mv = Eigen::Map<const Eigen::VectorXd>(m_grid.data(), 16);
  const Eigen::VectorXd ref = map_estimate_discrete(a, c, model.delta, mv);
  const auto got = inverse_transform(u);
  for (int i = 0; i < 16; ++i) CHECK(got[static_cast<std::size_t>(i)] == doctest::Approx(ref(i)).epsilon(1e-10));
  CHECK(normal_equation_residual(model, u, m) < 1e-13);
}

TEST_CASE("discrete oracle on a hand-sized system") {
  // A = I, C = I: u = m / (1 + delta^2).
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::VectorXd m = Eigen::VectorXd::LinSpaced(3, 1.0, 3.0);
  const auto u = map_estimate_discrete(id, id, 0.5, m);
  for (int i = 0; i < 3; ++i) CHECK(u(i) == doctest::Approx(m(i) / 1.25).epsilon(1e-15));
  CHECK_THROWS_CODE(map_estimate_discrete(id, Eigen::MatrixXd::Zero(3, 3), 0.5, m), singular);
  CHECK_THROWS_CODE(map_estimate_discrete(id, id, 0.5, Eigen::VectorXd::Ones(2)), size_mismatch);
}

TEST_CASE("dense conjugate gradient path solves the normal equations") {
  const auto lat = build_lattice(2, 8);
  std::vector<double> phi(lat->size());
  for (std::size_t j = 0; j < phi.size(); ++j) phi[j] = 1.0 + 0.4 * std::sin(grid_coordinate(*lat, j, 1));
  const GaussianModel model{lat, variable_coeff_op(phi, bessel_op(-1.0), lat),
                            GaussianPrior::from_multiplier(bessel_op(-2.0), 2.0, lat), 1.01, 0.1};
  CHECK_FALSE(model.diagonal());
  const auto m = forward_transform(lat, oracle::random_grid(lat->size(), 4));
  SolveDiagnostics diag;
  const auto u = map_estimate(model, m, &diag);
  CHECK(diag.converged);
  CHECK(diag.relative_residual <= 1e-10);
  CHECK(diag.iterations > 0);
  CHECK(diag.residual_history.size() == static_cast<std::size_t>(diag.iterations));
  CHECK(normal_equation_residual(model, u, m) < 1e-9);

  // Direct dense solve as reference.
  const Eigen::MatrixXcd a = densify(model.forward, lat).matrix();
  const Eigen::MatrixXcd cinv = densify(bessel_op(2.0), lat).matrix();
  const Eigen::MatrixXcd sys = a.adjoint() * a + 0.01 * cinv;
  const Eigen::VectorXcd mv = Eigen::Map<const Eigen::VectorXcd>(m.coeffs().data(), m.size());
  const Eigen::VectorXcd ref = sys.fullPivLu().solve(a.adjoint() * mv);
  double worst = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) worst = std::max(worst, std::abs(u[k] - ref(static_cast<Eigen::Index>(k))));
  CHECK(worst < 1e-8);
  CHECK(u.hermitian_defect() < 1e-10);
}

TEST_CASE("MAP estimate rejects bad inputs") {
  auto model = bessel_model(1, 8, 0.1);
  const auto m = SpectralField::zeros(build_lattice(1, 16));
  CHECK_THROWS_CODE(map_estimate(model, m), size_mismatch);
  model.delta = 0.0;
  CHECK_THROWS_CODE(map_estimate(model, SpectralField::zeros(model.lattice)), invalid_argument);
}

TEST_CASE("posterior covariance symbol and its two dense forms") {
  const auto model = bessel_model(1, 16, 0.2);
  const auto cov = posterior_covariance(model);
  REQUIRE(cov.is_multiplier());
  const auto sym = cov.multiplier().lattice_symbol(*model.lattice);
  for (std::size_t k = 0; k < sym.size(); ++k) {
    const double w = 1.0 + model.lattice->weight(k);
    const double expect = 0.04 / (1.0 / (w * w) + 0.04 * w * w);
    CHECK(sym[k].real() == doctest::Approx(expect).epsilon(1e-13));
  }
  const Eigen::MatrixXcd cond = posterior_covariance_conditioning_form(model);
  const Eigen::MatrixXcd direct = densify(cov, model.lattice).matrix();
  CHECK((cond - direct).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("posterior trace and operator norm") {
  const auto small = bessel_model(2, 16, 0.01);
  const auto large = small.with_delta(0.02);
  const double t1 = posterior_trace(posterior_covariance(small), small.lattice, 0.0);
  const double t2 = posterior_trace(posterior_covariance(large), large.lattice, 0.0);
  CHECK(t2 > t1);

  const auto cov = posterior_covariance(small);
  const OperatorHandle dense = densify(cov, small.lattice);
  CHECK(posterior_trace(dense, small.lattice, -1.0) ==
        doctest::Approx(posterior_trace(cov, small.lattice, -1.0)).epsilon(1e-12));
  CHECK(covariance_operator_norm(dense, small.lattice, 0.5) ==
        doctest::Approx(covariance_operator_norm(cov, small.lattice, 0.5)).epsilon(1e-10));
}

TEST_CASE("posterior samples have per-mode variance c_delta") {
  const auto model = bessel_model(1, 16, 0.1);
  const auto post = make_posterior(model, forward_transform(model.lattice, oracle::random_grid(16, 2)));
  const auto sym = post.cov().multiplier().lattice_symbol(*model.lattice);
  const int draws = 4000;
  std::vector<double> acc(16, 0.0);
  for (int i = 0; i < draws; ++i) {
    const auto s = sample_posterior(post, derive_seed(31, i)) - post.mean();
    for (std::size_t k = 0; k < 16; ++k) acc[k] += std::norm(s[k]);
  }
  for (std::size_t k = 0; k < 16; ++k)
    CHECK(acc[k] / draws / sym[k].real() == doctest::Approx(1.0).epsilon(5.0 * std::sqrt(2.0 / draws)));
  CHECK(max_diff(post.sample_deviation(5), post.sample_deviation(5)) == 0.0);
}

TEST_CASE("credible ball probability edge cases and validation") {
  const auto model = bessel_model(2, 16, 0.1);
  const PosteriorGaussian post(model, SpectralField::zeros(model.lattice));
  CHECK(credible_ball_prob(post, 0.0, 0.0, 200, 1).probability == 0.0);
  CHECK(credible_ball_prob(post, 0.0, 1e6, 200, 1).probability == 1.0);
  CHECK_THROWS_CODE(credible_ball_prob(post, 0.0, 1.0, 99, 1), invalid_argument);
  CHECK_THROWS_CODE(credible_ball_prob(post, 0.0, -1.0, 200, 1), invalid_argument);
  const auto a = credible_ball_prob(post, -1.0, 0.05, 400, 9, 1);
  const auto b = credible_ball_prob(post, -1.0, 0.05, 400, 9, 4);
  CHECK(a.probability == b.probability);
}
