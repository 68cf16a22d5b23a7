#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "stochavg/error.hpp"
#include "stochavg/linalg.hpp"

using namespace stochavg;
using linalg::Matrix;

namespace {

Matrix random_symmetric(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> z;
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) m(i, j) = m(j, i) = z(rng);
  return m;
}

}  // namespace

TEST_CASE("matrix constructors reject bad input") {
  CHECK_THROWS_AS(Matrix(2, 2, {1.0, 2.0, 3.0}), Error);
  CHECK_THROWS_AS(Matrix(1, 2, {1.0, NAN}), Error);
  CHECK_THROWS_AS((Matrix{{1.0, 2.0}, {3.0}}), Error);
  const Matrix m{{1, 2}, {3, 4}};
  CHECK(m.rows() * m.cols() == m.data().size());
  CHECK(m.transpose()(0, 1) == 3.0);
  CHECK((m * Matrix::identity(2)) == m);
}

TEST_CASE("sym_eigenvalues on small cases") {
  const auto id = linalg::sym_eigenvalues(Matrix::identity(3));
  for (double v : id) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  const auto z = linalg::sym_eigenvalues(Matrix(2, 2));
  CHECK(z[0] == 0.0);
  CHECK(z[1] == 0.0);
  const auto e = linalg::sym_eigenvalues(Matrix{{2, -1}, {-1, 2}});
  CHECK(e[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e[1] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(oracle::thrown_kind([] { linalg::sym_eigenvalues(Matrix{{0, 1}, {0, 0}}); }) == ErrorKind::NotSymmetric);
}

TEST_CASE("spectral and Frobenius norms") {
  CHECK(linalg::spectral_norm(Matrix::identity(5)) == doctest::Approx(1.0));
  const double d[] = {3.0, -4.0};
  CHECK(linalg::spectral_norm(Matrix::diagonal(d)) == doctest::Approx(4.0));
  CHECK(linalg::spectral_norm(Matrix{{0, 1}, {0, 0}}) == doctest::Approx(1.0));
  CHECK(linalg::frobenius_norm(Matrix(3, 3)) == 0.0);
  CHECK(linalg::frobenius_norm(Matrix::identity(4)) == doctest::Approx(2.0));
  CHECK(linalg::frobenius_norm(Matrix{{1, 2}, {2, 4}}) == doctest::Approx(5.0));
}

TEST_CASE("eigenvalues agree with an independent solver") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + t % 12;
    const Matrix m = random_symmetric(rng, n);
    const auto ours = linalg::sym_eigenvalues(m);
    const auto ref = oracle::sym_eigenvalues(oracle::to_eigen(m));
    const double scale = 1.0 + m.max_abs();
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(ours[i] - ref(i)) <= 1e-9 * scale);
  }
}

TEST_CASE("norm properties on random matrices") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + t % 7;
    const Matrix s = random_symmetric(rng, n);
    const auto ev = linalg::sym_eigenvalues(s);
    const double top = std::max(std::abs(ev.front()), std::abs(ev.back()));
    CHECK(std::abs(linalg::spectral_norm(s) - top) <= 10 * linalg::kDefaultTol * (1.0 + top));

    Matrix g(n, n);
    for (double& v : g.data()) v = z(rng);
    const double sn = linalg::spectral_norm(g), fn = linalg::frobenius_norm(g);
    CHECK(sn <= fn * (1.0 + 1e-12));
    CHECK(fn <= std::sqrt(static_cast<double>(n)) * sn * (1.0 + 1e-9));
    CHECK(sn == doctest::Approx(oracle::spectral_norm(oracle::to_eigen(g))).epsilon(1e-9));

    // Similarity by a permutation leaves the spectrum alone.
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix p(n, n);
    for (std::size_t i = 0; i < n; ++i) p(i, perm[i]) = 1.0;
    const auto pe = linalg::sym_eigenvalues(p * s * p.transpose());
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(pe[i] - ev[i]) <= 1e-9 * (1.0 + top));
  }
}
