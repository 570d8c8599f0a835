#pragma once

// Fourier-multiplier pseudodifferential operators on the torus, a dense
// backend for operators that do not commute with them, and numerical checks
// of the hypoelliptic symbol bounds.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hypoinv/spectral_grid.hpp"

namespace hypoinv {

/// Smoothing orders in the convention |a(l)| ~ between (1+|l|)^-t0 and (1+|l|)^-t.
struct SmoothingOrders {
  double t = 0.0;
  double t0 = 0.0;
};

/// Continuum symbol; receives the frequency and the lattice dimension.
using SymbolFn = std::function<Complex(const FreqVec&, int)>;

class MultiplierOp {
 public:
  MultiplierOp(SymbolFn symbol, SmoothingOrders orders, std::string label);

  Complex symbol(const FreqVec& l, int dim) const { return symbol_(l, dim); }
  const SymbolFn& symbol_fn() const { return symbol_; }
  const SmoothingOrders& orders() const { return orders_; }
  const std::string& label() const { return label_; }

  /// Symbol sampled on the lattice. On self-conjugate modes (the Nyquist
  /// planes) a complex value is replaced by its modulus so that real fields
  /// stay real.
  std::vector<Complex> lattice_symbol(const FrequencyLattice& lattice) const;

  MultiplierOp with_orders(SmoothingOrders orders) const;

 private:
  SymbolFn symbol_;
  SmoothingOrders orders_;
  std::string label_;
};

class DenseOp {
 public:
  DenseOp(LatticePtr lattice, Eigen::MatrixXcd matrix, SmoothingOrders orders, std::string label);

  static constexpr std::size_t max_unknowns = 4096;

  const LatticePtr& lattice() const { return lattice_; }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  const SmoothingOrders& orders() const { return orders_; }
  const std::string& label() const { return label_; }

 private:
  LatticePtr lattice_;
  Eigen::MatrixXcd matrix_;
  SmoothingOrders orders_;
  std::string label_;
};

class OperatorHandle {
 public:
  OperatorHandle(MultiplierOp op) : op_(std::move(op)) {}
  OperatorHandle(DenseOp op) : op_(std::move(op)) {}

  bool is_multiplier() const { return std::holds_alternative<MultiplierOp>(op_); }
  const MultiplierOp& multiplier() const { return std::get<MultiplierOp>(op_); }
  const DenseOp& dense() const { return std::get<DenseOp>(op_); }
  const SmoothingOrders& orders() const;
  const std::string& label() const;

 private:
  std::variant<MultiplierOp, DenseOp> op_;
};

MultiplierOp identity_op();
MultiplierOp scalar_op(double value);

/// (I - Laplacian)^a: symbol (1+|l|^2)^a, smoothing orders (-2a, -2a).
MultiplierOp bessel_op(double a);

/// Periodic heat operator inverse (1 + i l_t + |l_x|^2)^-1 on a lattice of
/// dimension spatial_dim + 1, time on the last axis. Type (1, 2).
MultiplierOp heat_op(int spatial_dim);

SpectralField apply(const OperatorHandle& op, const SpectralField& u);

OperatorHandle compose(const OperatorHandle& a, const OperatorHandle& b);
OperatorHandle adjoint(const OperatorHandle& op);
/// Throws ErrorCode::singular when a lattice symbol vanishes or the matrix
/// is numerically singular.
OperatorHandle invert(const OperatorHandle& op, const LatticePtr& lattice);

DenseOp densify(const MultiplierOp& op, const LatticePtr& lattice);
DenseOp densify(const OperatorHandle& op, const LatticePtr& lattice);

/// Matrix of u -> phi * (m u) in coefficient space: circular convolution by
/// the spectrum of phi after the multiplier. phi holds grid samples.
DenseOp variable_coeff_op(std::span<const double> phi, const MultiplierOp& m, const LatticePtr& lattice);

struct HypoellipticityReport {
  double c1 = 0.0;
  double c2 = 0.0;
  bool pass = false;
};

/// c1 = min |a| (1+|l|)^t0, c2 = max |a| (1+|l|)^t over the lattice.
HypoellipticityReport hypoellipticity_check(const MultiplierOp& op, const FrequencyLattice& lattice);

struct HypoellipticityRefinement {
  std::vector<int> sizes;
  std::vector<HypoellipticityReport> reports;
  /// Log-log growth rate of c2 and decay rate of c1 between the coarsest and
  /// finest lattice, per unit log n.
  double c2_growth = 0.0;
  double c1_decay = 0.0;
  bool pass = false;
};

/// Pass iff every single-lattice check passes and neither constant drifts
/// faster than n^0.25 under refinement.
HypoellipticityRefinement hypoellipticity_refinement(const MultiplierOp& op, int dim, std::span<const int> sizes);

struct SandwichReport {
  double upper_ratio_max = 0.0;  ///< max ||A*A u||_{r+2t} / ||u||_r
  double lower_ratio_max = 0.0;  ///< max ||u||_r / ||A*A u||_{r+2t0}
  bool pass = false;
};

/// Ratios over n_samples random probe fields: white noise draws and random
/// single-mode fields.
SandwichReport norm_sandwich_check(const OperatorHandle& normal_op, const LatticePtr& lattice, double r, double t,
                                   double t0, int n_samples, std::uint64_t seed);

struct SandwichRefinement {
  std::vector<int> sizes;
  std::vector<SandwichReport> reports;
  double upper_growth = 0.0;  ///< finest / coarsest
  double lower_growth = 0.0;
  bool pass = false;
};

/// Pass iff both ratio maxima grow by less than a factor 2 from the
/// coarsest to the finest lattice.
SandwichRefinement norm_sandwich_refinement(const MultiplierOp& forward, int dim, std::span<const int> sizes, double r,
                                            double t, double t0, int n_samples, std::uint64_t seed);

}  // namespace hypoinv
