#pragma once

// Truncated frequency lattice on the flat torus (R / 2piZ)^d and the
// correspondence between real grid samples and Fourier coefficients.
//
// Coefficients are taken against the orthonormal basis of L^2 with respect
// to the normalised measure dx / (2pi)^d, so sum |c|^2 equals the mean of the
// squared grid samples and white noise has identity covariance.

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace hypoinv {

using Complex = std::complex<double>;

/// Integer frequency vector; components beyond the lattice dimension are zero.
using FreqVec = std::array<int, 3>;

class FrequencyLattice {
 public:
  FrequencyLattice(int dim, int n_per_dim);

  int dim() const { return dim_; }
  int n_per_dim() const { return n_; }
  std::size_t size() const { return freqs_.size(); }

  const FreqVec& frequency(std::size_t k) const { return freqs_[k]; }
  double weight(std::size_t k) const { return weights_[k]; }
  std::span<const double> weights() const { return weights_; }

  /// Index of -l reduced mod n.
  std::size_t partner(std::size_t k) const { return partner_[k]; }
  bool self_conjugate(std::size_t k) const { return partner_[k] == k; }

  /// Index of an arbitrary frequency vector, wrapped into the lattice.
  std::size_t index_of(const FreqVec& l) const;

  bool operator==(const FrequencyLattice& o) const { return dim_ == o.dim_ && n_ == o.n_; }

 private:
  int dim_;
  int n_;
  std::vector<FreqVec> freqs_;
  std::vector<double> weights_;
  std::vector<std::size_t> partner_;
};

using LatticePtr = std::shared_ptr<const FrequencyLattice>;

/// Frequencies ordered row-major over FFT indices; each axis maps index
/// k to k (k < n/2) or k - n.
LatticePtr build_lattice(int dim, int n_per_dim);

bool same_lattice(const LatticePtr& a, const LatticePtr& b);

class SpectralField {
 public:
  SpectralField(LatticePtr lattice, std::vector<Complex> coeffs);
  static SpectralField zeros(LatticePtr lattice);

  const LatticePtr& lattice() const { return lattice_; }
  std::size_t size() const { return coeffs_.size(); }
  std::span<const Complex> coeffs() const { return coeffs_; }
  std::span<Complex> coeffs() { return coeffs_; }
  const Complex& operator[](std::size_t k) const { return coeffs_[k]; }
  Complex& operator[](std::size_t k) { return coeffs_[k]; }

  /// max |c(-l) - conj c(l)|.
  double hermitian_defect() const;
  double l2_norm_squared() const;

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double a);

 private:
  LatticePtr lattice_;
  std::vector<Complex> coeffs_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double a, SpectralField f);

/// L^2 inner product <u, v> = sum u(l) conj(v(l)).
Complex inner_product(const SpectralField& u, const SpectralField& v);

/// sqrt( sum (1+|l|^2)^q |c(l)|^2 ).
double weighted_norm(const SpectralField& u, double q);

/// Samples are row-major at x_j = 2 pi j / n along each axis.
SpectralField forward_transform(LatticePtr lattice, std::span<const double> values);

/// Rejects spectra whose Hermitian defect exceeds 1e-10 (relative to the
/// largest coefficient, floor 1).
std::vector<double> inverse_transform(const SpectralField& f);

/// Mean of squared samples: the discrete L^2 norm under the normalised measure.
double grid_l2_norm_squared(std::span<const double> values);

/// Grid coordinate of sample `flat` along `axis`.
double grid_coordinate(const FrequencyLattice& lattice, std::size_t flat, int axis);

}  // namespace hypoinv
