#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hypoinv/psdo_ops.hpp"

namespace hypoinv {

/// Counter-based seed derivation (splitmix64 finaliser over master and index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Gaussian prior N(0, C_U) with C_U of smoothing order 2r.
class GaussianPrior {
 public:
  /// Symbol must be real and strictly positive on the lattice.
  static GaussianPrior from_multiplier(const MultiplierOp& cov, double r, const LatticePtr& lattice);
  /// Hermitian positive definite matrix; square root by eigendecomposition.
  static GaussianPrior from_dense(const DenseOp& cov, double r);

  const OperatorHandle& cov() const { return cov_; }
  const OperatorHandle& sqrt_cov() const { return sqrt_cov_; }
  double r() const { return r_; }

 private:
  GaussianPrior(OperatorHandle cov, OperatorHandle sqrt_cov, double r)
      : cov_(std::move(cov)), sqrt_cov_(std::move(sqrt_cov)), r_(r) {}

  OperatorHandle cov_;
  OperatorHandle sqrt_cov_;
  double r_;
};

struct NoiseSpec {
  double s = 0.0;
  LatticePtr lattice;
  /// White noise lives in H^{-s} iff s > d/2.
  bool admissible() const { return lattice && s > 0.5 * lattice->dim(); }
};

/// Real-basis coefficients i.i.d. N(0,1): paired modes get N(0,1/2) real and
/// imaginary parts, self-conjugate modes a real N(0,1).
SpectralField sample_white_noise(const LatticePtr& lattice, std::uint64_t seed);

SpectralField sample_prior(const GaussianPrior& prior, const LatticePtr& lattice, std::uint64_t seed);

/// ( sum (1+|l|^2)^q |u(l)|^2 )^{1/2}
double sobolev_norm(const SpectralField& u, double q);

/// sum over the lattice of (1+|l|^2)^q.
double bessel_lattice_sum(const FrequencyLattice& lattice, double q);

/// Square root of a positive semidefinite Hermitian matrix.
Eigen::MatrixXcd hermitian_sqrt(const Eigen::MatrixXcd& m);

struct TraceCheckReport {
  std::vector<int> sizes;
  std::vector<double> partial_traces;
  double increment_exponent = 0.0;  ///< log-log slope of trace increments vs n
  bool convergent = false;
  bool predicted_convergent = false;  ///< tau < r - d/2
  double weyl_exponent_fit = 0.0;     ///< fitted counting exponent N(nu) ~ nu^e
  double weyl_exponent_predicted = 0.0;
  bool pass = false;
};

/// Partial traces sum (1+|l|^2)^tau c_U(l) over growing lattices. Convergent
/// when successive increments decay faster than n^-0.25.
TraceCheckReport prior_trace_check(const MultiplierOp& cov, double r, double tau, int dim, std::span<const int> sizes);

}  // namespace hypoinv
