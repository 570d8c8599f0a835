#include "hypoinv/psdo_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hypoinv/error.hpp"
#include "hypoinv/random_fields.hpp"

namespace hypoinv {

namespace {

double squared_length(const FreqVec& l) {
  return double(l[0]) * l[0] + double(l[1]) * l[1] + double(l[2]) * l[2];
}

void check_dense_size(std::size_t n) {
  if (n > DenseOp::max_unknowns)
    throw Error(ErrorCode::invalid_argument, "dense operators are limited to 4096 unknowns");
}

Eigen::Map<const Eigen::VectorXcd> as_vector(const SpectralField& f) {
  return {f.coeffs().data(), static_cast<Eigen::Index>(f.size())};
}

}  // namespace

MultiplierOp::MultiplierOp(SymbolFn symbol, SmoothingOrders orders, std::string label)
    : symbol_(std::move(symbol)), orders_(orders), label_(std::move(label)) {}

std::vector<Complex> MultiplierOp::lattice_symbol(const FrequencyLattice& lattice) const {
  std::vector<Complex> out(lattice.size());
  const int nyq = -lattice.n_per_dim() / 2;
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    const FreqVec& l = lattice.frequency(k);
    Complex a = symbol_(l, lattice.dim());
    bool nyquist = false;
    for (int i = 0; i < lattice.dim(); ++i) nyquist = nyquist || l[i] == nyq;
    // Partners of modes on a Nyquist face are not at -l, so conjugate
    // symmetry of the symbol does not carry over: both share one modulus.
    if (nyquist && a.imag() != 0.0) {
      const std::size_t p = lattice.partner(k);
      a = std::abs(p < k ? symbol_(lattice.frequency(p), lattice.dim()) : a);
    }
    out[k] = a;
  }
  return out;
}

MultiplierOp MultiplierOp::with_orders(SmoothingOrders orders) const {
  return MultiplierOp(symbol_, orders, label_);
}

DenseOp::DenseOp(LatticePtr lattice, Eigen::MatrixXcd matrix, SmoothingOrders orders, std::string label)
    : lattice_(std::move(lattice)), matrix_(std::move(matrix)), orders_(orders), label_(std::move(label)) {
  const auto n = static_cast<Eigen::Index>(lattice_->size());
  if (matrix_.rows() != n || matrix_.cols() != n)
    throw Error(ErrorCode::size_mismatch, "dense operator must be square with the lattice size");
  check_dense_size(lattice_->size());
}

const SmoothingOrders& OperatorHandle::orders() const {
  return std::visit([](const auto& op) -> const SmoothingOrders& { return op.orders(); }, op_);
}

const std::string& OperatorHandle::label() const {
  return std::visit([](const auto& op) -> const std::string& { return op.label(); }, op_);
}

MultiplierOp identity_op() {
  return MultiplierOp([](const FreqVec&, int) { return Complex(1.0); }, {0.0, 0.0}, "identity");
}

MultiplierOp scalar_op(double value) {
  return MultiplierOp([value](const FreqVec&, int) { return Complex(value); }, {0.0, 0.0},
                      "scalar(" + std::to_string(value) + ")");
}

MultiplierOp bessel_op(double a) {
  return MultiplierOp([a](const FreqVec& l, int) { return Complex(std::pow(1.0 + squared_length(l), a)); },
                      {-2.0 * a, -2.0 * a}, "bessel(" + std::to_string(a) + ")");
}

MultiplierOp heat_op(int spatial_dim) {
  if (spatial_dim < 1 || spatial_dim > 2)
    throw Error(ErrorCode::invalid_argument, "heat operator needs 1 or 2 spatial dimensions");
  return MultiplierOp(
      [spatial_dim](const FreqVec& l, int dim) {
        if (dim != spatial_dim + 1)
          throw Error(ErrorCode::size_mismatch, "heat operator expects lattice dimension spatial_dim + 1");
        double lx2 = 0.0;
        for (int a = 0; a < spatial_dim; ++a) lx2 += double(l[a]) * l[a];
        return 1.0 / Complex(1.0 + lx2, double(l[spatial_dim]));
      },
      {1.0, 2.0}, "heat");
}

SpectralField apply(const OperatorHandle& op, const SpectralField& u) {
  if (op.is_multiplier()) {
    const auto sym = op.multiplier().lattice_symbol(*u.lattice());
    SpectralField out = u;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] *= sym[k];
    return out;
  }
  const auto& d = op.dense();
  if (!same_lattice(d.lattice(), u.lattice())) throw Error(ErrorCode::size_mismatch, "lattice mismatch");
  Eigen::VectorXcd y = d.matrix() * as_vector(u);
  return SpectralField(u.lattice(), std::vector<Complex>(y.data(), y.data() + y.size()));
}

OperatorHandle compose(const OperatorHandle& a, const OperatorHandle& b) {
  const SmoothingOrders orders{a.orders().t + b.orders().t, a.orders().t0 + b.orders().t0};
  const std::string label = a.label() + "*" + b.label();
  if (a.is_multiplier() && b.is_multiplier()) {
    auto fa = a.multiplier().symbol_fn();
    auto fb = b.multiplier().symbol_fn();
    return MultiplierOp([fa, fb](const FreqVec& l, int dim) { return fa(l, dim) * fb(l, dim); }, orders, label);
  }
  const LatticePtr lattice = a.is_multiplier() ? b.dense().lattice() : a.dense().lattice();
  const DenseOp da = densify(a, lattice);
  const DenseOp db = densify(b, lattice);
  return DenseOp(lattice, da.matrix() * db.matrix(), orders, label);
}

OperatorHandle adjoint(const OperatorHandle& op) {
  if (op.is_multiplier()) {
    auto f = op.multiplier().symbol_fn();
    return MultiplierOp([f](const FreqVec& l, int dim) { return std::conj(f(l, dim)); }, op.orders(),
                        "adj(" + op.label() + ")");
  }
  const auto& d = op.dense();
  return DenseOp(d.lattice(), d.matrix().adjoint(), d.orders(), "adj(" + d.label() + ")");
}

OperatorHandle invert(const OperatorHandle& op, const LatticePtr& lattice) {
  const SmoothingOrders orders{-op.orders().t0, -op.orders().t};
  const std::string label = "inv(" + op.label() + ")";
  if (op.is_multiplier()) {
    const auto sym = op.multiplier().lattice_symbol(*lattice);
    double max_abs = 0.0;
    double min_abs = std::numeric_limits<double>::infinity();
    for (const auto& a : sym) {
      max_abs = std::max(max_abs, std::abs(a));
      min_abs = std::min(min_abs, std::abs(a));
    }
    if (!(min_abs > 1e-14 * max_abs)) throw Error(ErrorCode::singular, "multiplier symbol vanishes on the lattice");
    auto f = op.multiplier().symbol_fn();
    return MultiplierOp([f](const FreqVec& l, int dim) { return 1.0 / f(l, dim); }, orders, label);
  }
  const auto& d = op.dense();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(d.matrix());
  if (!(lu.rcond() > 1e-14)) throw Error(ErrorCode::singular, "dense operator is numerically singular");
  return DenseOp(d.lattice(), lu.inverse(), orders, label);
}

DenseOp densify(const MultiplierOp& op, const LatticePtr& lattice) {
  check_dense_size(lattice->size());
  const auto sym = op.lattice_symbol(*lattice);
  Eigen::VectorXcd diag = Eigen::Map<const Eigen::VectorXcd>(sym.data(), static_cast<Eigen::Index>(sym.size()));
  return DenseOp(lattice, diag.asDiagonal(), op.orders(), op.label());
}

DenseOp densify(const OperatorHandle& op, const LatticePtr& lattice) {
  if (op.is_multiplier()) return densify(op.multiplier(), lattice);
  if (!same_lattice(op.dense().lattice(), lattice)) throw Error(ErrorCode::size_mismatch, "lattice mismatch");
  return op.dense();
}

DenseOp variable_coeff_op(std::span<const double> phi, const MultiplierOp& m, const LatticePtr& lattice) {
  check_dense_size(lattice->size());
  if (phi.size() != lattice->size()) throw Error(ErrorCode::size_mismatch, "phi sample count mismatch");
  if (!(*std::min_element(phi.begin(), phi.end()) > 0.0))
    throw Error(ErrorCode::invalid_argument, "variable coefficient must be strictly positive");
  const SpectralField phi_hat = forward_transform(lattice, phi);
  const auto sym = m.lattice_symbol(*lattice);
  const auto n = static_cast<Eigen::Index>(lattice->size());
  Eigen::MatrixXcd mat(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& li = lattice->frequency(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& lj = lattice->frequency(static_cast<std::size_t>(j));
      const std::size_t diff = lattice->index_of({li[0] - lj[0], li[1] - lj[1], li[2] - lj[2]});
      mat(i, j) = phi_hat[diff] * sym[static_cast<std::size_t>(j)];
    }
  }
  return DenseOp(lattice, std::move(mat), m.orders(), "phi*" + m.label());
}

HypoellipticityReport hypoellipticity_check(const MultiplierOp& op, const FrequencyLattice& lattice) {
  const auto sym = op.lattice_symbol(lattice);
  HypoellipticityReport rep;
  rep.c1 = std::numeric_limits<double>::infinity();
  rep.c2 = 0.0;
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    const double bracket = 1.0 + std::sqrt(lattice.weight(k));
    const double mag = std::abs(sym[k]);
    rep.c1 = std::min(rep.c1, mag * std::pow(bracket, op.orders().t0));
    rep.c2 = std::max(rep.c2, mag * std::pow(bracket, op.orders().t));
  }
  rep.pass = std::isfinite(rep.c1) && std::isfinite(rep.c2) && rep.c1 > 0.0 && rep.c2 > 0.0;
  return rep;
}

HypoellipticityRefinement hypoellipticity_refinement(const MultiplierOp& op, int dim, std::span<const int> sizes) {
  if (sizes.size() < 2) throw Error(ErrorCode::invalid_argument, "refinement needs at least two lattice sizes");
  HypoellipticityRefinement out;
  out.pass = true;
  for (int n : sizes) {
    out.sizes.push_back(n);
    out.reports.push_back(hypoellipticity_check(op, FrequencyLattice(dim, n)));
    out.pass = out.pass && out.reports.back().pass;
  }
  if (!out.pass) return out;
  const double span = std::log(double(sizes.back()) / sizes.front());
  out.c2_growth = std::log(out.reports.back().c2 / out.reports.front().c2) / span;
  out.c1_decay = std::log(out.reports.front().c1 / out.reports.back().c1) / span;
  out.pass = out.c2_growth < 0.25 && out.c1_decay < 0.25;
  return out;
}

SandwichReport norm_sandwich_check(const OperatorHandle& normal_op, const LatticePtr& lattice, double r, double t,
                                   double t0, int n_samples, std::uint64_t seed) {
  SandwichReport rep;
  for (int i = 0; i < n_samples; ++i) {
    const std::uint64_t probe_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    SpectralField u = SpectralField::zeros(lattice);
    if (i % 2 == 0) {
      u = sample_white_noise(lattice, probe_seed);
    } else {
      std::mt19937_64 gen(probe_seed);
      std::uniform_int_distribution<std::size_t> pick(0, lattice->size() - 1);
      std::normal_distribution<double> normal;
      const std::size_t k = pick(gen);
      const Complex c(normal(gen), normal(gen));
      if (lattice->self_conjugate(k)) {
        u[k] = std::abs(c);
      } else {
        u[k] = c;
        u[lattice->partner(k)] = std::conj(c);
      }
    }
    const SpectralField v = apply(normal_op, u);
    const double u_r = weighted_norm(u, r);
    rep.upper_ratio_max = std::max(rep.upper_ratio_max, weighted_norm(v, r + 2.0 * t) / u_r);
    rep.lower_ratio_max = std::max(rep.lower_ratio_max, u_r / weighted_norm(v, r + 2.0 * t0));
  }
  rep.pass = std::isfinite(rep.upper_ratio_max) && std::isfinite(rep.lower_ratio_max) && n_samples > 0;
  return rep;
}

SandwichRefinement norm_sandwich_refinement(const MultiplierOp& forward, int dim, std::span<const int> sizes, double r,
                                            double t, double t0, int n_samples, std::uint64_t seed) {
  if (sizes.size() < 2) throw Error(ErrorCode::invalid_argument, "refinement needs at least two lattice sizes");
  const OperatorHandle fwd(forward);
  const OperatorHandle normal = compose(adjoint(fwd), fwd);
  SandwichRefinement out;
  out.pass = true;
  for (int n : sizes) {
    out.sizes.push_back(n);
    out.reports.push_back(norm_sandwich_check(normal, build_lattice(dim, n), r, t, t0, n_samples, seed));
    out.pass = out.pass && out.reports.back().pass;
  }
  out.upper_growth = out.reports.back().upper_ratio_max / out.reports.front().upper_ratio_max;
  out.lower_growth = out.reports.back().lower_ratio_max / out.reports.front().lower_ratio_max;
  out.pass = out.pass && out.upper_growth < 2.0 && out.lower_growth < 2.0;
  return out;
}

}  // namespace hypoinv
