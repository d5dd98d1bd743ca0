#include <doctest.h>

#include <cmath>
#include <random>

#include "ivforge/numerics.hpp"

using namespace ivforge;

namespace {

// Brute-force normal-equation solve (Gaussian elimination with partial
// pivoting on A'A x = A'b). Independent of the QR path it checks.
Vector normal_equation_solve(const Matrix& a, const Vector& b) {
  const std::size_t k = a.cols();
  Matrix g(k, k + 1);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < a.rows(); ++r) s += a(r, i) * a(r, j);
      g(i, j) = s;
    }
    double s = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) s += a(r, i) * b[r];
    g(i, k) = s;
  }
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < k; ++r)
      if (std::abs(g(r, c)) > std::abs(g(p, c))) p = r;
    for (std::size_t j = 0; j <= k; ++j) std::swap(g(c, j), g(p, j));
    for (std::size_t r = c + 1; r < k; ++r) {
      const double f = g(r, c) / g(c, c);
      for (std::size_t j = c; j <= k; ++j) g(r, j) -= f * g(c, j);
    }
  }
  Vector x(k);
  for (std::size_t r = k; r-- > 0;) {
    double s = g(r, k);
    for (std::size_t j = r + 1; j < k; ++j) s -= g(r, j) * x[j];
    x[r] = s / g(r, r);
  }
  return x;
}

}  // namespace

TEST_CASE("solve_least_squares identity") {
  Matrix a(3, 3);
  for (std::size_t i = 0; i < 3; ++i) a(i, i) = 1.0;
  const Vector x = solve_least_squares(a, {1, 2, 3});
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(2.0));
  CHECK(x[2] == doctest::Approx(3.0));
}

TEST_CASE("solve_least_squares simple regression") {
  // Hand-solved normal equations for y = b0 + b1 t at t = 0,1,2.
  const Matrix a = Matrix::from_columns({{1, 1, 1}, {0, 1, 2}});
  const Vector x = solve_least_squares(a, {1, 2, 3});
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("solve_least_squares duplicated column is rank deficient") {
  const Matrix a = Matrix::from_columns({{1, 2, 3}, {1, 2, 3}, {0, 1, 0}});
  CHECK_THROWS_AS(solve_least_squares(a, {1, 1, 1}), RankDeficientError);
}

TEST_CASE("solve_least_squares matches normal equations on random instances") {
  std::mt19937_64 rng(20240811);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 50; ++rep) {
    Matrix a(5, 3);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 3; ++j) a(i, j) = nd(rng);
    Vector b(5);
    for (auto& v : b) v = nd(rng);
    const Vector qr = solve_least_squares(a, b);
    const Vector ne = normal_equation_solve(a, b);
    for (std::size_t j = 0; j < 3; ++j) CHECK(qr[j] == doctest::Approx(ne[j]).epsilon(1e-8));
  }
}

TEST_CASE("residualize kills exactly linear instruments") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  const std::size_t n = 200;
  Vector x1(n), x2(n), f(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = nd(rng);
    x2[i] = nd(rng);
    f[i] = 3.0 * x1[i] + 2.0;
  }
  const Matrix x = with_intercept(Matrix::from_columns({x1, x2}));
  const Vector fp = residualize(f, x);
  for (double v : fp) CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("residualize matches explicit tiny projection") {
  // Four hand-picked rows; oracle is the brute-force normal-equation
  // projection of f onto (1, x1, x2).
  const Vector x1 = {1.0, 2.0, -1.0, 0.5};
  const Vector x2 = {0.5, -1.0, 2.0, 1.0};
  Vector f(4);
  for (std::size_t i = 0; i < 4; ++i) f[i] = x1[i] * x2[i];
  const Matrix x = with_intercept(Matrix::from_columns({x1, x2}));

  const Vector beta = normal_equation_solve(x, f);
  Vector expected = f;
  const Vector fit = matvec(x, beta);
  for (std::size_t i = 0; i < 4; ++i) expected[i] -= fit[i];

  const Vector fp = residualize(f, x);
  for (std::size_t i = 0; i < 4; ++i) CHECK(fp[i] == doctest::Approx(expected[i]).epsilon(1e-10));
}

TEST_CASE("residualize is a fixed point on orthogonal input and idempotent") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> nd;
  const std::size_t n = 500;
  Vector x1(n), x2(n), raw(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = nd(rng);
    x2[i] = nd(rng);
    raw[i] = x1[i] * x2[i];
  }
  const Matrix x = with_intercept(Matrix::from_columns({x1, x2}));
  const Vector fp = residualize(raw, x);

  CHECK(std::abs(sample_mean(fp)) < 1e-10);
  CHECK(std::abs(sample_cov(fp, x1)) < 1e-8);
  CHECK(std::abs(sample_cov(fp, x2)) < 1e-8);

  const Vector fp2 = residualize(fp, x);
  for (std::size_t i = 0; i < n; ++i) CHECK(fp2[i] == doctest::Approx(fp[i]).epsilon(1e-10));
}

TEST_CASE("sample_cov direct values") {
  CHECK(sample_cov({1, 2, 3}, {1, 2, 3}) == doctest::Approx(1.0));
  CHECK(sample_cov({1, 2, 3}, {5, 5, 5}) == doctest::Approx(0.0));
  CHECK(sample_cov({0, 1}, {1, 0}) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(sample_cov({1, 2}, {1, 2, 3}), LengthMismatchError);
}

TEST_CASE("cholesky round trip and failure") {
  Matrix a(2, 2);
  a(0, 0) = 4.0; a(0, 1) = 1.0;
  a(1, 0) = 1.0; a(1, 1) = 3.0;
  const Matrix l = cholesky(a);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      double s = 0.0;
      for (std::size_t m = 0; m < 2; ++m) s += l(i, m) * l(j, m);
      CHECK(s == doctest::Approx(a(i, j)).epsilon(1e-12));
    }
  Matrix bad(2, 2);
  bad(0, 0) = 1.0; bad(0, 1) = 2.0;
  bad(1, 0) = 2.0; bad(1, 1) = 1.0;
  CHECK_THROWS_AS(cholesky(bad), NonPositiveDefiniteError);
}

TEST_CASE("matrix rejects non-finite entries") {
  CHECK_THROWS_AS(Matrix(1, 2, Vector{1.0, std::nan("")}), InvalidSpecError);
}
