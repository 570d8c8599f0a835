#include <doctest.h>

#include "hypoinv/spectral_grid.hpp"
#include "oracles.hpp"

using namespace hypoinv;

TEST_CASE("lattice ordering follows FFT indices") {
  const auto lat = build_lattice(1, 8);
  const int expect[] = {0, 1, 2, 3, -4, -3, -2, -1};
  REQUIRE(lat->size() == 8);
  for (std::size_t k = 0; k < 8; ++k) {
    CHECK(lat->frequency(k)[0] == expect[k]);
    CHECK(lat->weight(k) == double(expect[k] * expect[k]));
  }
  CHECK(lat->self_conjugate(0));
  CHECK(lat->self_conjugate(4));
  CHECK(lat->partner(1) == 7);
  CHECK(lat->partner(3) == 5);
}

TEST_CASE("two-dimensional lattice is row-major and index_of wraps") {
  const auto lat = build_lattice(2, 4);
  REQUIRE(lat->size() == 16);
  CHECK(lat->frequency(1) == FreqVec{0, 1, 0});
  CHECK(lat->frequency(4) == FreqVec{1, 0, 0});
  CHECK(lat->frequency(15) == FreqVec{-1, -1, 0});
  for (std::size_t k = 0; k < lat->size(); ++k) {
    CHECK(lat->index_of(lat->frequency(k)) == k);
    const auto& l = lat->frequency(k);
    CHECK(lat->index_of({l[0] + 4, l[1] - 8, 0}) == k);
    CHECK(lat->frequency(lat->partner(k))[0] == (-l[0] == 2 ? -2 : -l[0]));
  }
  CHECK(lat->index_of({2, 0, 0}) == lat->index_of({-2, 0, 0}));
}

TEST_CASE("lattice construction rejects bad shapes") {
  CHECK_THROWS_CODE(build_lattice(0, 8), invalid_argument);
  CHECK_THROWS_CODE(build_lattice(4, 8), invalid_argument);
  CHECK_THROWS_CODE(build_lattice(1, 7), invalid_argument);
  CHECK_THROWS_CODE(build_lattice(2, 2), invalid_argument);
  CHECK(same_lattice(build_lattice(2, 8), build_lattice(2, 8)));
  CHECK_FALSE(same_lattice(build_lattice(2, 8), build_lattice(1, 8)));
}

TEST_CASE("constant field has unit zero mode") {
  const auto lat = build_lattice(2, 8);
  const std::vector<double> ones(lat->size(), 1.0);
  const auto f = forward_transform(lat, ones);
  CHECK(std::abs(f[0] - Complex(1.0, 0.0)) < 1e-14);
  for (std::size_t k = 1; k < f.size(); ++k) CHECK(std::abs(f[k]) < 1e-14);
}

TEST_CASE("cosine has coefficient 1/2 at +-l") {
  const auto lat = build_lattice(1, 16);
  std::vector<double> v(16);
  for (std::size_t j = 0; j < 16; ++j) v[j] = std::cos(3.0 * grid_coordinate(*lat, j, 0));
  const auto f = forward_transform(lat, v);
  for (std::size_t k = 0; k < f.size(); ++k) {
    const int l = lat->frequency(k)[0];
    CHECK(std::abs(f[k] - Complex(std::abs(l) == 3 ? 0.5 : 0.0, 0.0)) < 1e-14);
  }
}

TEST_CASE("forward transform matches a naive DFT") {
  for (int d : {1, 2, 3}) {
    const int n = d == 3 ? 4 : 8;
    const auto lat = build_lattice(d, n);
    const auto v = oracle::random_grid(lat->size(), 11 + d);
    const auto f = forward_transform(lat, v);
    const auto ref = oracle::naive_dft(v, d, n);
    double worst = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k) worst = std::max(worst, std::abs(f[k] - ref[k]));
    CHECK(worst < 1e-13);
  }
}

TEST_CASE("round trip, Parseval and Hermitian symmetry") {
  const auto lat = build_lattice(2, 16);
  const auto v = oracle::random_grid(lat->size(), 5);
  const auto f = forward_transform(lat, v);
  CHECK(f.hermitian_defect() < 1e-15);
  const auto back = inverse_transform(f);
  double worst = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) worst = std::max(worst, std::abs(back[j] - v[j]));
  CHECK(worst < 1e-13);

  double mean_sq = 0.0;
  for (double x : v) mean_sq += x * x;
  mean_sq /= double(v.size());
  CHECK(f.l2_norm_squared() == doctest::Approx(mean_sq).epsilon(1e-13));
  CHECK(grid_l2_norm_squared(v) == doctest::Approx(mean_sq).epsilon(1e-13));
}

TEST_CASE("inverse transform rejects non-Hermitian spectra") {
  const auto lat = build_lattice(1, 8);
  auto f = SpectralField::zeros(lat);
  f[1] = Complex(1.0, 0.0);
  CHECK_THROWS_CODE(inverse_transform(f), symmetry_violation);
  f[7] = Complex(1.0, 0.0);
  CHECK_NOTHROW(inverse_transform(f));
}

TEST_CASE("weighted norm and inner product") {
  const auto lat = build_lattice(1, 8);
  auto u = SpectralField::zeros(lat);
  auto v = SpectralField::zeros(lat);
  u[2] = Complex(1.0, 2.0);
  u[6] = Complex(1.0, -2.0);
  v[2] = Complex(0.0, 1.0);
  v[6] = Complex(0.0, -1.0);
  // frequencies +-2: weight (1+4)^q per mode, |c|^2 = 5.
  CHECK(weighted_norm(u, 1.5) == doctest::Approx(std::sqrt(2.0 * 5.0 * std::pow(5.0, 1.5))).epsilon(1e-14));
  CHECK(weighted_norm(u, 0.0) == doctest::Approx(std::sqrt(u.l2_norm_squared())).epsilon(1e-14));
  const Complex ip = inner_product(u, v);
  CHECK(std::abs(ip - Complex(4.0, 0.0)) < 1e-14);
  CHECK(std::abs(inner_product(v, u) - std::conj(ip)) < 1e-14);
}

TEST_CASE("field arithmetic") {
  const auto lat = build_lattice(1, 8);
  auto a = forward_transform(lat, oracle::random_grid(8, 1));
  auto b = forward_transform(lat, oracle::random_grid(8, 2));
  const auto s = a + b;
  const auto d = s - b;
  for (std::size_t k = 0; k < 8; ++k) CHECK(std::abs(d[k] - a[k]) < 1e-15);
  const auto t = 2.0 * a;
  CHECK(t.l2_norm_squared() == doctest::Approx(4.0 * a.l2_norm_squared()));
  const auto other = SpectralField::zeros(build_lattice(1, 16));
  CHECK_THROWS_CODE(a + other, size_mismatch);
  CHECK_THROWS_CODE(SpectralField(lat, std::vector<Complex>(3)), size_mismatch);
}
