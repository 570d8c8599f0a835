#include "hypoinv/posterior.hpp"

#include <cmath>

#include "hypoinv/error.hpp"
#include "hypoinv/parallel.hpp"

namespace hypoinv {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

VectorXcd to_vector(const SpectralField& f) {
  return Eigen::Map<const VectorXcd>(f.coeffs().data(), static_cast<Index>(f.size()));
}

SpectralField to_field(const LatticePtr& lattice, const VectorXcd& v) {
  return SpectralField(lattice, std::vector<Complex>(v.data(), v.data() + v.size()));
}

std::vector<double> prior_symbol(const GaussianModel& model) {
  const auto sym = model.prior.cov().multiplier().lattice_symbol(*model.lattice);
  std::vector<double> out(sym.size());
  for (std::size_t k = 0; k < sym.size(); ++k) out[k] = sym[k].real();
  return out;
}

/// A, A*A and C_U^-1 as dense matrices, for models that do not diagonalise.
struct DenseSystem {
  MatrixXcd a;
  MatrixXcd normal;  // A*A + delta^2 C_U^-1

  explicit DenseSystem(const GaussianModel& model) {
    a = densify(model.forward, model.lattice).matrix();
    normal = a.adjoint() * a;
    const double d2 = model.delta * model.delta;
    if (model.prior.cov().is_multiplier()) {
      const auto c = prior_symbol(model);
      for (Index k = 0; k < normal.rows(); ++k) normal(k, k) += d2 / c[static_cast<std::size_t>(k)];
    } else {
      const MatrixXcd& cu = model.prior.cov().dense().matrix();
      Eigen::LDLT<MatrixXcd> ldlt(cu);
      if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::singular, "prior covariance is singular");
      normal += d2 * ldlt.solve(MatrixXcd::Identity(cu.rows(), cu.cols()));
    }
    normal = 0.5 * (normal + normal.adjoint()).eval();
  }
};

VectorXcd conjugate_gradient(const MatrixXcd& s, const VectorXcd& b, SolveDiagnostics& diag) {
  const Index n = b.size();
  const Eigen::VectorXd precond = s.diagonal().real().cwiseInverse();
  VectorXcd x = VectorXcd::Zero(n);
  const double b_norm = b.norm();
  diag = SolveDiagnostics{};
  if (b_norm == 0.0) {
    diag.converged = true;
    return x;
  }
  VectorXcd r = b;
  VectorXcd z = precond.asDiagonal() * r;
  VectorXcd p = z;
  double rz = r.dot(z).real();
  const int cap = static_cast<int>(10 * n);
  for (int it = 1; it <= cap; ++it) {
    const VectorXcd q = s * p;
    const Complex alpha = rz / p.dot(q).real();
    x += alpha * p;
    r -= alpha * q;
    const double rel = r.norm() / b_norm;
    diag.iterations = it;
    diag.relative_residual = rel;
    diag.residual_history.push_back(rel);
    if (rel <= 1e-10) {
      diag.converged = true;
      return x;
    }
    z = precond.asDiagonal() * r;
    const double rz_next = r.dot(z).real();
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return x;
}

}  // namespace

SmoothnessParams GaussianModel::params() const {
  return {prior.r(), s, forward.orders().t, forward.orders().t0, lattice->dim()};
}

std::vector<std::string> GaussianModel::warnings() const {
  return bayes_rate(params(), params().tau() - 1.0).warnings();
}

GaussianModel GaussianModel::with_delta(double new_delta) const {
  GaussianModel out = *this;
  out.delta = new_delta;
  return out;
}

SpectralField map_estimate(const GaussianModel& model, const SpectralField& m, SolveDiagnostics* diag) {
  if (!(model.delta > 0.0)) throw Error(ErrorCode::invalid_argument, "delta must be positive");
  if (!same_lattice(model.lattice, m.lattice())) throw Error(ErrorCode::size_mismatch, "lattice mismatch");
  const double d2 = model.delta * model.delta;

  if (model.diagonal()) {
    const auto a = model.forward.multiplier().lattice_symbol(*model.lattice);
    const auto c = prior_symbol(model);
    SpectralField out = SpectralField::zeros(model.lattice);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::conj(a[k]) * m[k] / (std::norm(a[k]) + d2 / c[k]);
    if (diag) *diag = SolveDiagnostics{0, 0.0, true, {}};
    return out;
  }

  const DenseSystem sys(model);
  const VectorXcd rhs = sys.a.adjoint() * to_vector(m);
  SolveDiagnostics local;
  const VectorXcd x = conjugate_gradient(sys.normal, rhs, local);
  if (diag) *diag = local;
  if (!local.converged)
    throw Error(ErrorCode::not_converged,
                "conjugate gradient stalled at relative residual " + std::to_string(local.relative_residual) +
                    " after " + std::to_string(local.iterations) + " iterations");
  return to_field(model.lattice, x);
}

Eigen::VectorXd map_estimate_discrete(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c, double delta,
                                      const Eigen::VectorXd& m) {
  if (a.rows() != m.size() || a.cols() != c.rows() || c.rows() != c.cols())
    throw Error(ErrorCode::size_mismatch, "inconsistent matrix dimensions");
  Eigen::FullPivLU<Eigen::MatrixXd> c_lu(c);
  if (!c_lu.isInvertible()) throw Error(ErrorCode::singular, "prior covariance matrix is singular");
  const Eigen::MatrixXd system = a.transpose() * a + delta * delta * c_lu.inverse();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (!lu.isInvertible()) throw Error(ErrorCode::singular, "normal equations are singular");
  return lu.solve(a.transpose() * m);
}

double normal_equation_residual(const GaussianModel& model, const SpectralField& u, const SpectralField& m) {
  const OperatorHandle adj = adjoint(model.forward);
  const SpectralField rhs = apply(adj, m);
  SpectralField lhs = apply(adj, apply(model.forward, u));
  const OperatorHandle cinv = invert(model.prior.cov(), model.lattice);
  lhs += (model.delta * model.delta) * apply(cinv, u);
  return std::sqrt((lhs - rhs).l2_norm_squared() / rhs.l2_norm_squared());
}

OperatorHandle posterior_covariance(const GaussianModel& model) {
  const double d2 = model.delta * model.delta;
  const SmoothingOrders orders = model.prior.cov().orders();
  if (model.diagonal()) {
    auto fa = model.forward.multiplier().symbol_fn();
    auto fc = model.prior.cov().multiplier().symbol_fn();
    return MultiplierOp(
        [fa, fc, d2](const FreqVec& l, int dim) { return Complex(d2 / (std::norm(fa(l, dim)) + d2 / fc(l, dim).real())); },
        orders, "C_delta");
  }
  const DenseSystem sys(model);
  Eigen::LLT<MatrixXcd> llt(sys.normal);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::singular, "posterior precision is not positive definite");
  MatrixXcd cov = d2 * llt.solve(MatrixXcd::Identity(sys.normal.rows(), sys.normal.cols()));
  cov = 0.5 * (cov + cov.adjoint()).eval();
  return DenseOp(model.lattice, std::move(cov), orders, "C_delta");
}

MatrixXcd posterior_covariance_conditioning_form(const GaussianModel& model) {
  const MatrixXcd a = densify(model.forward, model.lattice).matrix();
  const MatrixXcd cu = densify(model.prior.cov(), model.lattice).matrix();
  const MatrixXcd gram = a * cu * a.adjoint() + model.delta * model.delta * MatrixXcd::Identity(a.rows(), a.rows());
  Eigen::LDLT<MatrixXcd> ldlt(gram);
  if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::singular, "A C_U A* + delta^2 I is singular");
  const MatrixXcd acu = a * cu;
  MatrixXcd out = cu - acu.adjoint() * ldlt.solve(acu);
  return 0.5 * (out + out.adjoint());
}

double posterior_trace(const OperatorHandle& cov, const LatticePtr& lattice, double q) {
  const auto w = lattice->weights();
  double acc = 0.0;
  if (cov.is_multiplier()) {
    const auto sym = cov.multiplier().lattice_symbol(*lattice);
    for (std::size_t k = 0; k < sym.size(); ++k) acc += std::pow(1.0 + w[k], q) * sym[k].real();
    return acc;
  }
  const auto& m = cov.dense().matrix();
  for (Index k = 0; k < m.rows(); ++k) acc += std::pow(1.0 + w[static_cast<std::size_t>(k)], q) * m(k, k).real();
  return acc;
}

double covariance_operator_norm(const OperatorHandle& cov, const LatticePtr& lattice, double tau) {
  const auto w = lattice->weights();
  if (cov.is_multiplier()) {
    const auto sym = cov.multiplier().lattice_symbol(*lattice);
    double best = 0.0;
    for (std::size_t k = 0; k < sym.size(); ++k) best = std::max(best, std::pow(1.0 + w[k], tau) * std::abs(sym[k]));
    return best;
  }
  Eigen::VectorXd scale(static_cast<Index>(w.size()));
  for (Index k = 0; k < scale.size(); ++k) scale(k) = std::pow(1.0 + w[static_cast<std::size_t>(k)], 0.5 * tau);
  const MatrixXcd weighted = scale.asDiagonal() * cov.dense().matrix() * scale.asDiagonal();
  Eigen::JacobiSVD<MatrixXcd> svd(weighted);
  return svd.singularValues()(0);
}

PosteriorGaussian::PosteriorGaussian(GaussianModel model, SpectralField mean)
    : model_(std::move(model)), mean_(std::move(mean)), cov_(posterior_covariance(model_)) {
  if (cov_.is_multiplier()) {
    const auto sym = cov_.multiplier().lattice_symbol(*model_.lattice);
    sqrt_diag_.resize(sym.size());
    for (std::size_t k = 0; k < sym.size(); ++k) sqrt_diag_[k] = std::sqrt(sym[k].real());
  } else {
    sqrt_dense_ = hermitian_sqrt(cov_.dense().matrix());
  }
}

SpectralField PosteriorGaussian::sample_deviation(std::uint64_t seed) const {
  SpectralField w = sample_white_noise(model_.lattice, seed);
  if (!sqrt_diag_.empty()) {
    for (std::size_t k = 0; k < w.size(); ++k) w[k] *= sqrt_diag_[k];
    return w;
  }
  return to_field(model_.lattice, sqrt_dense_ * to_vector(w));
}

PosteriorGaussian make_posterior(const GaussianModel& model, const SpectralField& m) {
  return PosteriorGaussian(model, map_estimate(model, m));
}

SpectralField sample_posterior(const PosteriorGaussian& post, std::uint64_t seed) {
  return post.mean() + post.sample_deviation(seed);
}

BallProbability credible_ball_prob(const PosteriorGaussian& post, double zeta1, double radius, std::size_t n_mc,
                                   std::uint64_t seed, int threads) {
  if (n_mc < 100) throw Error(ErrorCode::invalid_argument, "credible ball estimate needs at least 100 samples");
  if (radius < 0.0) throw Error(ErrorCode::invalid_argument, "radius must be non-negative");
  std::vector<unsigned char> inside(n_mc, 0);
  parallel_for(n_mc, threads, [&](std::size_t i) {
    inside[i] = sobolev_norm(post.sample_deviation(derive_seed(seed, i)), zeta1) <= radius ? 1 : 0;
  });
  std::size_t hits = 0;
  for (auto v : inside) hits += v;
  BallProbability out;
  out.n = n_mc;
  out.probability = double(hits) / double(n_mc);
  out.std_error = std::sqrt(out.probability * (1.0 - out.probability) / double(n_mc));
  return out;
}

}  // namespace hypoinv
