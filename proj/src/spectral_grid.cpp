#include "hypoinv/spectral_grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "hypoinv/error.hpp"

namespace hypoinv {

namespace {

int wrap_frequency(int k, int n) { return k < n / 2 ? k : k - n; }

int fft_index(int l, int n) { return ((l % n) + n) % n; }

// FFTW planning is not thread-safe; execution is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

void run_fft(const FrequencyLattice& lattice, std::vector<Complex>& data, int sign) {
  std::array<int, 3> dims{};
  for (int a = 0; a < lattice.dim(); ++a) dims[a] = lattice.n_per_dim();
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan = fftw_plan_dft(lattice.dim(), dims.data(), ptr, ptr, sign, FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw Error(ErrorCode::invalid_argument, "FFTW could not create a plan");
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(plan_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace

FrequencyLattice::FrequencyLattice(int dim, int n_per_dim) : dim_(dim), n_(n_per_dim) {
  if (dim < 1 || dim > 3) throw Error(ErrorCode::invalid_argument, "lattice dimension must be 1, 2 or 3");
  if (n_per_dim < 4 || n_per_dim % 2 != 0)
    throw Error(ErrorCode::invalid_argument, "n_per_dim must be even and at least 4");

  std::size_t total = 1;
  for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(n_per_dim);
  freqs_.resize(total);
  weights_.resize(total);
  partner_.resize(total);

  for (std::size_t flat = 0; flat < total; ++flat) {
    FreqVec l{0, 0, 0};
    std::size_t rest = flat;
    for (int a = dim - 1; a >= 0; --a) {
      l[a] = wrap_frequency(static_cast<int>(rest % n_per_dim), n_per_dim);
      rest /= n_per_dim;
    }
    freqs_[flat] = l;
    weights_[flat] = double(l[0]) * l[0] + double(l[1]) * l[1] + double(l[2]) * l[2];
  }
  for (std::size_t flat = 0; flat < total; ++flat) {
    const auto& l = freqs_[flat];
    partner_[flat] = index_of({-l[0], -l[1], -l[2]});
  }
}

std::size_t FrequencyLattice::index_of(const FreqVec& l) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) flat = flat * n_ + static_cast<std::size_t>(fft_index(l[a], n_));
  return flat;
}

LatticePtr build_lattice(int dim, int n_per_dim) {
  return std::make_shared<const FrequencyLattice>(dim, n_per_dim);
}

bool same_lattice(const LatticePtr& a, const LatticePtr& b) {
  return a && b && (a == b || *a == *b);
}

SpectralField::SpectralField(LatticePtr lattice, std::vector<Complex> coeffs)
    : lattice_(std::move(lattice)), coeffs_(std::move(coeffs)) {
  if (!lattice_) throw Error(ErrorCode::invalid_argument, "spectral field needs a lattice");
  if (coeffs_.size() != lattice_->size())
    throw Error(ErrorCode::size_mismatch, "coefficient count does not match lattice size");
}

SpectralField SpectralField::zeros(LatticePtr lattice) {
  const std::size_t n = lattice->size();
  return SpectralField(std::move(lattice), std::vector<Complex>(n));
}

double SpectralField::hermitian_defect() const {
  double defect = 0.0;
  for (std::size_t k = 0; k < coeffs_.size(); ++k)
    defect = std::max(defect, std::abs(coeffs_[lattice_->partner(k)] - std::conj(coeffs_[k])));
  return defect;
}

double SpectralField::l2_norm_squared() const {
  double acc = 0.0;
  for (const auto& c : coeffs_) acc += std::norm(c);
  return acc;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  if (!same_lattice(lattice_, o.lattice_)) throw Error(ErrorCode::size_mismatch, "lattice mismatch");
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  if (!same_lattice(lattice_, o.lattice_)) throw Error(ErrorCode::size_mismatch, "lattice mismatch");
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
  return *this;
}

SpectralField& SpectralField::operator*=(double a) {
  for (auto& c : coeffs_) c *= a;
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double a, SpectralField f) { return f *= a; }

Complex inner_product(const SpectralField& u, const SpectralField& v) {
  if (!same_lattice(u.lattice(), v.lattice())) throw Error(ErrorCode::size_mismatch, "lattice mismatch");
  Complex acc{};
  for (std::size_t k = 0; k < u.size(); ++k) acc += u[k] * std::conj(v[k]);
  return acc;
}

double weighted_norm(const SpectralField& u, double q) {
  const auto w = u.lattice()->weights();
  double acc = 0.0;
  if (q == 0.0) {
    for (std::size_t k = 0; k < u.size(); ++k) acc += std::norm(u[k]);
  } else {
    for (std::size_t k = 0; k < u.size(); ++k) acc += std::pow(1.0 + w[k], q) * std::norm(u[k]);
  }
  return std::sqrt(acc);
}

SpectralField forward_transform(LatticePtr lattice, std::span<const double> values) {
  if (values.size() != lattice->size())
    throw Error(ErrorCode::size_mismatch, "sample count does not match lattice size");
  std::vector<Complex> data(values.begin(), values.end());
  run_fft(*lattice, data, FFTW_FORWARD);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& c : data) c *= scale;
  SpectralField out(std::move(lattice), std::move(data));
  // Enforce exact symmetry; rounding in the FFT leaves ~1e-17 residue.
  const auto& lat = *out.lattice();
  for (std::size_t k = 0; k < out.size(); ++k) {
    const std::size_t p = lat.partner(k);
    if (p == k) {
      out[k] = Complex(out[k].real(), 0.0);
    } else if (p > k) {
      const Complex avg = 0.5 * (out[k] + std::conj(out[p]));
      out[k] = avg;
      out[p] = std::conj(avg);
    }
  }
  return out;
}

std::vector<double> inverse_transform(const SpectralField& f) {
  double scale = 1.0;
  for (const auto& c : f.coeffs()) scale = std::max(scale, std::abs(c));
  if (f.hermitian_defect() > 1e-10 * scale)
    throw Error(ErrorCode::symmetry_violation, "spectrum is not Hermitian; field would not be real");
  std::vector<Complex> data(f.coeffs().begin(), f.coeffs().end());
  run_fft(*f.lattice(), data, FFTW_BACKWARD);
  std::vector<double> out(data.size());
  for (std::size_t j = 0; j < data.size(); ++j) out[j] = data[j].real();
  return out;
}

double grid_l2_norm_squared(std::span<const double> values) {
  double acc = 0.0;
  for (double v : values) acc += v * v;
  return values.empty() ? 0.0 : acc / static_cast<double>(values.size());
}

double grid_coordinate(const FrequencyLattice& lattice, std::size_t flat, int axis) {
  const int n = lattice.n_per_dim();
  std::size_t rest = flat;
  for (int a = lattice.dim() - 1; a > axis; --a) rest /= n;
  return 2.0 * std::numbers::pi * static_cast<double>(rest % n) / n;
}

}  // namespace hypoinv
