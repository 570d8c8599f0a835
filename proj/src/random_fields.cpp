#include "hypoinv/random_fields.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hypoinv/error.hpp"

namespace hypoinv {

namespace {

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

GaussianPrior GaussianPrior::from_multiplier(const MultiplierOp& cov, double r, const LatticePtr& lattice) {
  for (const auto& c : cov.lattice_symbol(*lattice)) {
    if (!(c.real() > 0.0) || std::abs(c.imag()) > 1e-12 * c.real())
      throw Error(ErrorCode::invalid_argument, "prior covariance symbol must be real and positive");
  }
  auto f = cov.symbol_fn();
  MultiplierOp root([f](const FreqVec& l, int dim) { return Complex(std::sqrt(f(l, dim).real())); },
                    {0.5 * cov.orders().t, 0.5 * cov.orders().t0}, "sqrt(" + cov.label() + ")");
  return GaussianPrior(cov, std::move(root), r);
}

Eigen::MatrixXcd hermitian_sqrt(const Eigen::MatrixXcd& m) {
  const Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h);
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::singular, "eigendecomposition failed");
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().adjoint();
}

GaussianPrior GaussianPrior::from_dense(const DenseOp& cov, double r) {
  const auto& m = cov.matrix();
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff()))
    throw Error(ErrorCode::invalid_argument, "prior covariance must be self-adjoint");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0))
    throw Error(ErrorCode::invalid_argument, "prior covariance must be positive definite");
  DenseOp root(cov.lattice(), hermitian_sqrt(m), {0.5 * cov.orders().t, 0.5 * cov.orders().t0},
               "sqrt(" + cov.label() + ")");
  return GaussianPrior(cov, std::move(root), r);
}

SpectralField sample_white_noise(const LatticePtr& lattice, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  const double half = std::sqrt(0.5);
  SpectralField out = SpectralField::zeros(lattice);
  for (std::size_t k = 0; k < lattice->size(); ++k) {
    const std::size_t p = lattice->partner(k);
    if (p == k) {
      out[k] = normal(gen);
    } else if (p > k) {
      const double re = half * normal(gen);
      const double im = half * normal(gen);
      out[k] = Complex(re, im);
      out[p] = Complex(re, -im);
    }
  }
  return out;
}

SpectralField sample_prior(const GaussianPrior& prior, const LatticePtr& lattice, std::uint64_t seed) {
  return apply(prior.sqrt_cov(), sample_white_noise(lattice, seed));
}

double sobolev_norm(const SpectralField& u, double q) { return weighted_norm(u, q); }

double bessel_lattice_sum(const FrequencyLattice& lattice, double q) {
  double acc = 0.0;
  for (double w : lattice.weights()) acc += std::pow(1.0 + w, q);
  return acc;
}

TraceCheckReport prior_trace_check(const MultiplierOp& cov, double r, double tau, int dim, std::span<const int> sizes) {
  if (sizes.size() < 3) throw Error(ErrorCode::invalid_argument, "trace check needs at least three lattice sizes");
  TraceCheckReport rep;
  for (int n : sizes) {
    const FrequencyLattice lattice(dim, n);
    const auto sym = cov.lattice_symbol(lattice);
    double acc = 0.0;
    for (std::size_t k = 0; k < lattice.size(); ++k) acc += std::pow(1.0 + lattice.weight(k), tau) * sym[k].real();
    rep.sizes.push_back(n);
    rep.partial_traces.push_back(acc);
  }
  std::vector<double> log_n, log_inc;
  for (std::size_t i = 1; i < rep.sizes.size(); ++i) {
    const double inc = rep.partial_traces[i] - rep.partial_traces[i - 1];
    if (inc <= 0.0) continue;
    log_n.push_back(std::log(double(rep.sizes[i])));
    log_inc.push_back(std::log(inc));
  }
  rep.increment_exponent = log_n.size() >= 2 ? fit_slope(log_n, log_inc) : -1e300;
  rep.convergent = rep.increment_exponent < -0.25;
  rep.predicted_convergent = tau < r - 0.5 * dim;

  // Eigenvalue counting for B_U^{-1} inside the inscribed ball, where the
  // square lattice does not distort the count.
  const FrequencyLattice finest(dim, rep.sizes.back());
  const auto sym = cov.lattice_symbol(finest);
  const double radius2 = 0.25 * finest.n_per_dim() * finest.n_per_dim();
  std::vector<double> nu;
  for (std::size_t k = 0; k < finest.size(); ++k) {
    if (finest.weight(k) >= radius2) continue;
    nu.push_back(1.0 / (std::pow(1.0 + finest.weight(k), tau) * sym[k].real()));
  }
  std::sort(nu.begin(), nu.end());
  std::vector<double> log_nu, log_count;
  for (std::size_t j = nu.size() / 4; j < nu.size(); ++j) {
    log_nu.push_back(std::log(nu[j]));
    log_count.push_back(std::log(double(j + 1)));
  }
  rep.weyl_exponent_fit = fit_slope(log_nu, log_count);
  rep.weyl_exponent_predicted = dim / (2.0 * (r - tau));
  rep.pass = rep.convergent == rep.predicted_convergent &&
             std::abs(rep.weyl_exponent_fit - rep.weyl_exponent_predicted) <= 0.1 * rep.weyl_exponent_predicted;
  return rep;
}

}  // namespace hypoinv
