#pragma once

// MAP/CM estimate and the Gaussian posterior for M = A U + delta E.

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "hypoinv/psdo_ops.hpp"
#include "hypoinv/random_fields.hpp"
#include "hypoinv/theory_rates.hpp"

namespace hypoinv {

struct GaussianModel {
  LatticePtr lattice;
  OperatorHandle forward;
  GaussianPrior prior;
  double s = 0.0;
  double delta = 1.0;

  /// r from the prior, (t, t0) from the forward operator's declared orders.
  SmoothnessParams params() const;
  /// Hypothesis violations of the Bayes rate statement; never fatal.
  std::vector<std::string> warnings() const;
  bool diagonal() const { return forward.is_multiplier() && prior.cov().is_multiplier(); }
  GaussianModel with_delta(double new_delta) const;
};

struct SolveDiagnostics {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  std::vector<double> residual_history;
};

/// (A*A + delta^2 C_U^-1)^-1 A* m. Diagonal models use the per-frequency
/// formula; otherwise Jacobi-preconditioned conjugate gradients to a relative
/// residual of 1e-10, capped at 10 n iterations (ErrorCode::not_converged).
SpectralField map_estimate(const GaussianModel& model, const SpectralField& m, SolveDiagnostics* diag = nullptr);

/// Dense oracle (A^T A + delta^2 C^-1)^-1 A^T m for a k x n matrix A.
Eigen::VectorXd map_estimate_discrete(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c, double delta,
                                      const Eigen::VectorXd& m);

/// ||(A*A + delta^2 C_U^-1) u - A* m|| / ||A* m||.
double normal_equation_residual(const GaussianModel& model, const SpectralField& u, const SpectralField& m);

/// delta^2 (A*A + delta^2 C_U^-1)^-1; explicit inverse for dense models.
OperatorHandle posterior_covariance(const GaussianModel& model);

/// C_U - C_U A* (A C_U A* + delta^2 I)^-1 A C_U, always dense.
Eigen::MatrixXcd posterior_covariance_conditioning_form(const GaussianModel& model);

/// Trace on H^q: sum (1+|l|^2)^q C(l,l).
double posterior_trace(const OperatorHandle& cov, const LatticePtr& lattice, double q);

/// Operator norm H^{-tau} -> H^{tau}.
double covariance_operator_norm(const OperatorHandle& cov, const LatticePtr& lattice, double tau);

class PosteriorGaussian {
 public:
  PosteriorGaussian(GaussianModel model, SpectralField mean);

  const GaussianModel& model() const { return model_; }
  const SpectralField& mean() const { return mean_; }
  const OperatorHandle& cov() const { return cov_; }

  /// W ~ N(0, C_delta) from the white-noise draw with this seed.
  SpectralField sample_deviation(std::uint64_t seed) const;

 private:
  GaussianModel model_;
  SpectralField mean_;
  OperatorHandle cov_;
  std::vector<double> sqrt_diag_;  // multiplier models
  Eigen::MatrixXcd sqrt_dense_;    // dense models
};

PosteriorGaussian make_posterior(const GaussianModel& model, const SpectralField& m);

/// mean + C_delta^{1/2} white_noise(seed).
SpectralField sample_posterior(const PosteriorGaussian& post, std::uint64_t seed);

struct BallProbability {
  double probability = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// Monte Carlo mass of the ball ||W||_{H^zeta1} <= radius under N(0, C_delta);
/// sample i uses derive_seed(seed, i).
BallProbability credible_ball_prob(const PosteriorGaussian& post, double zeta1, double radius, std::size_t n_mc,
                                   std::uint64_t seed, int threads = 1);

}  // namespace hypoinv
