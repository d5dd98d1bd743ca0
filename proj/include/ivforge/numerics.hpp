#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "ivforge/errors.hpp"

namespace ivforge {

using Vector = std::vector<double>;

// Dense row-major matrix. Construction rejects non-finite entries.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, Vector entries);
  static Matrix from_columns(const std::vector<Vector>& columns);

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  Vector col(std::size_t j) const;
  void set_col(std::size_t j, const Vector& v);
  const Vector& data() const noexcept { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

inline constexpr double kRankTol = 1e-10;

// Column-pivoted Householder QR of an n x k matrix (n >= k). Throws
// RankDeficientError naming the offending original column when a pivot falls
// below rank_tol times the largest pivot.
class QrFactor {
 public:
  explicit QrFactor(const Matrix& a, double rank_tol = kRankTol);

  // Least-squares solution of a x = b.
  Vector solve(const Vector& b) const;

  // (a' a)^{-1}, k x k.
  Matrix inverse_gram() const;

  std::size_t rows() const noexcept { return n_; }
  std::size_t cols() const noexcept { return k_; }

 private:
  std::size_t n_ = 0;
  std::size_t k_ = 0;
  Matrix qr_;                     // Householder vectors below diagonal, R above
  Vector rdiag_;                  // diagonal of R
  std::vector<std::size_t> perm_; // column permutation (pivoting)
};

Vector solve_least_squares(const Matrix& a, const Vector& b, double rank_tol = kRankTol);

// Residuals of f from its least-squares projection onto the columns of x.
// x must carry an intercept column (use with_intercept).
Vector residualize(const Vector& f, const Matrix& x_with_intercept);

// Prepends an all-ones column.
Matrix with_intercept(const Matrix& x);

double sample_mean(const Vector& v);
double sample_var(const Vector& v);   // n-1 denominator
double sample_sd(const Vector& v);
double sample_cov(const Vector& a, const Vector& b);  // n-1 denominator

Vector matvec(const Matrix& a, const Vector& x);

// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
Matrix cholesky(const Matrix& a, const char* what = "matrix");

}  // namespace ivforge
