#include "ivforge/numerics.hpp"

#include <cmath>
#include <numeric>

namespace ivforge {

namespace {

void require_finite(const Vector& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidSpecError(std::string(what) + " has non-finite entry");
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, Vector entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_)
    throw InvalidSpecError("matrix entry count does not match rows*cols");
  require_finite(data_, "matrix");
}

Matrix Matrix::from_columns(const std::vector<Vector>& columns) {
  if (columns.empty()) return {};
  const std::size_t n = columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != n) throw LengthMismatchError(c.size(), n);
  }
  Matrix m(n, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    require_finite(columns[j], "matrix column");
    for (std::size_t i = 0; i < n; ++i) m(i, j) = columns[j][i];
  }
  return m;
}

Vector Matrix::col(std::size_t j) const {
  if (j >= cols_) throw IndexOutOfRangeError("matrix column", j, cols_);
  Vector v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

void Matrix::set_col(std::size_t j, const Vector& v) {
  if (j >= cols_) throw IndexOutOfRangeError("matrix column", j, cols_);
  if (v.size() != rows_) throw LengthMismatchError(v.size(), rows_);
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

QrFactor::QrFactor(const Matrix& a, double rank_tol) : n_(a.rows()), k_(a.cols()), qr_(a) {
  if (n_ < k_) throw InvalidSpecError("least squares needs rows >= cols");
  rdiag_.assign(k_, 0.0);
  perm_.resize(k_);
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});

  Vector col_norm2(k_, 0.0);
  for (std::size_t j = 0; j < k_; ++j)
    for (std::size_t i = 0; i < n_; ++i) col_norm2[j] += qr_(i, j) * qr_(i, j);

  for (std::size_t j = 0; j < k_; ++j) {
    // pivot on the column with the largest remaining norm
    std::size_t p = j;
    for (std::size_t c = j + 1; c < k_; ++c)
      if (col_norm2[c] > col_norm2[p]) p = c;
    if (p != j) {
      for (std::size_t i = 0; i < n_; ++i) std::swap(qr_(i, j), qr_(i, p));
      std::swap(col_norm2[j], col_norm2[p]);
      std::swap(perm_[j], perm_[p]);
    }

    double norm = 0.0;
    for (std::size_t i = j; i < n_; ++i) norm += qr_(i, j) * qr_(i, j);
    norm = std::sqrt(norm);
    if (qr_(j, j) > 0) norm = -norm;
    rdiag_[j] = norm;
    if (norm != 0.0) {
      for (std::size_t i = j; i < n_; ++i) qr_(i, j) /= norm;
      qr_(j, j) += 1.0;
      for (std::size_t c = j + 1; c < k_; ++c) {
        double s = 0.0;
        for (std::size_t i = j; i < n_; ++i) s += qr_(i, j) * qr_(i, c);
        s = -s / qr_(j, j);
        for (std::size_t i = j; i < n_; ++i) qr_(i, c) += s * qr_(i, j);
      }
    }
    for (std::size_t c = j + 1; c < k_; ++c) col_norm2[c] -= qr_(j, c) * qr_(j, c);
  }

  double max_pivot = 0.0;
  for (double r : rdiag_) max_pivot = std::max(max_pivot, std::abs(r));
  for (std::size_t j = 0; j < k_; ++j) {
    if (std::abs(rdiag_[j]) < rank_tol * max_pivot || max_pivot == 0.0)
      throw RankDeficientError(perm_[j]);
  }
}

Vector QrFactor::solve(const Vector& b) const {
  if (b.size() != n_) throw LengthMismatchError(b.size(), n_);
  Vector y = b;
  for (std::size_t j = 0; j < k_; ++j) {
    double s = 0.0;
    for (std::size_t i = j; i < n_; ++i) s += qr_(i, j) * y[i];
    s = -s / qr_(j, j);
    for (std::size_t i = j; i < n_; ++i) y[i] += s * qr_(i, j);
  }
  Vector x(k_);
  for (std::size_t j = k_; j-- > 0;) {
    double s = y[j];
    for (std::size_t c = j + 1; c < k_; ++c) s -= qr_(j, c) * x[c];
    x[j] = s / rdiag_[j];
  }
  Vector out(k_);
  for (std::size_t j = 0; j < k_; ++j) out[perm_[j]] = x[j];
  return out;
}

Matrix QrFactor::inverse_gram() const {
  // R^{-1} by back substitution, then (A'A)^{-1} = P R^{-1} R^{-T} P'.
  Matrix rinv(k_, k_);
  for (std::size_t c = 0; c < k_; ++c) {
    Vector e(k_, 0.0);
    e[c] = 1.0;
    for (std::size_t j = k_; j-- > 0;) {
      double s = e[j];
      for (std::size_t m = j + 1; m < k_; ++m) s -= qr_(j, m) * rinv(m, c);
      rinv(j, c) = s / rdiag_[j];
    }
  }
  Matrix g(k_, k_);
  for (std::size_t i = 0; i < k_; ++i)
    for (std::size_t j = 0; j < k_; ++j) {
      double s = 0.0;
      for (std::size_t m = 0; m < k_; ++m) s += rinv(i, m) * rinv(j, m);
      g(i, j) = s;
    }
  Matrix out(k_, k_);
  for (std::size_t i = 0; i < k_; ++i)
    for (std::size_t j = 0; j < k_; ++j) out(perm_[i], perm_[j]) = g(i, j);
  return out;
}

Vector solve_least_squares(const Matrix& a, const Vector& b, double rank_tol) {
  return QrFactor(a, rank_tol).solve(b);
}

Vector residualize(const Vector& f, const Matrix& x_with_intercept) {
  if (f.size() != x_with_intercept.rows())
    throw LengthMismatchError(f.size(), x_with_intercept.rows());
  const Vector beta = solve_least_squares(x_with_intercept, f);
  Vector out = f;
  const Vector fit = matvec(x_with_intercept, beta);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= fit[i];
  return out;
}

Matrix with_intercept(const Matrix& x) {
  Matrix m(x.rows(), x.cols() + 1);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    m(i, 0) = 1.0;
    for (std::size_t j = 0; j < x.cols(); ++j) m(i, j + 1) = x(i, j);
  }
  return m;
}

double sample_mean(const Vector& v) {
  if (v.empty()) throw InvalidSpecError("mean of empty vector");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_var(const Vector& v) {
  if (v.size() < 2) throw InvalidSpecError("variance needs n >= 2");
  const double m = sample_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double sample_sd(const Vector& v) { return std::sqrt(sample_var(v)); }

double sample_cov(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw LengthMismatchError(a.size(), b.size());
  if (a.size() < 2) throw InvalidSpecError("covariance needs n >= 2");
  const double ma = sample_mean(a);
  const double mb = sample_mean(b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / static_cast<double>(a.size() - 1);
}

Vector matvec(const Matrix& a, const Vector& x) {
  if (x.size() != a.cols()) throw LengthMismatchError(x.size(), a.cols());
  Vector out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    out[i] = s;
  }
  return out;
}

Matrix cholesky(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) throw InvalidSpecError("cholesky needs a square matrix");
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a(i, j);
      for (std::size_t m = 0; m < j; ++m) s -= l(i, m) * l(j, m);
      if (i == j) {
        if (s <= 0.0) throw NonPositiveDefiniteError(what);
        l(i, i) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  return l;
}

}  // namespace ivforge
