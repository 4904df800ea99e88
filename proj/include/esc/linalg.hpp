#pragma once

/// \file linalg.hpp
/// \brief Small dense row-major matrices and the handful of kernels the
/// certifiers need: cyclic Jacobi for symmetric eigenproblems, Gaussian
/// elimination, spectral norms and a Padé matrix exponential.
///
/// Sizes are tiny (n <= 32 for the 2n x 2n LMI blocks), so everything is
/// plain O(n^3) code over std::vector storage.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "esc/errors.hpp"

namespace esc {

using Vector = std::vector<double>;

class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      if (row.size() != cols_) throw DimensionError("ragged matrix initializer");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

  [[nodiscard]] Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Matrix& operator+=(const Matrix& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Matrix& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw DimensionError("matrix product shape mismatch");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend Vector operator*(const Matrix& a, std::span<const double> x) {
    if (a.cols_ != x.size()) throw DimensionError("matrix-vector shape mismatch");
    Vector y(a.rows_, 0.0);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < a.cols_; ++j) s += a(i, j) * x[j];
      y[i] = s;
    }
    return y;
  }
  friend Vector operator*(const Matrix& a, const Vector& x) {
    return a * std::span<const double>(x);
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

private:
  void require_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("matrix shape mismatch");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// vector helpers

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("dot product length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline Vector axpy(double alpha, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("axpy length mismatch");
  Vector r(y.begin(), y.end());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] += alpha * x[i];
  return r;
}

inline Vector subtract(std::span<const double> a, std::span<const double> b) {
  return axpy(-1.0, b, a);
}

/// x^T M y
inline double quadratic_form(std::span<const double> x, const Matrix& m,
                             std::span<const double> y) {
  if (m.rows() != x.size() || m.cols() != y.size())
    throw DimensionError("quadratic form shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) row += m(i, j) * y[j];
    s += x[i] * row;
  }
  return s;
}

// ---------------------------------------------------------------------------
// matrix helpers

inline double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

inline double max_abs(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s = std::max(s, std::abs(v));
  return s;
}

/// Largest |M - M^T| entry relative to max(1, max|M|).
inline double asymmetry(const Matrix& m) {
  if (!m.is_square()) throw DimensionError("asymmetry of non-square matrix");
  double worst = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j)
      worst = std::max(worst, std::abs(m(i, j) - m(j, i)));
  return worst / std::max(1.0, max_abs(m));
}

inline Matrix symmetric_part(const Matrix& m) {
  Matrix s = m + m.transpose();
  return s *= 0.5;
}

inline bool is_diagonal(const Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) != 0.0) return false;
  return true;
}

inline Matrix block2x2(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d) {
  const std::size_t n = a.rows();
  const std::size_t m = d.rows();
  if (a.cols() != n || b.rows() != n || b.cols() != m || c.rows() != m || c.cols() != n ||
      d.cols() != m)
    throw DimensionError("block matrix shape mismatch");
  Matrix r(n + m, n + m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) r(i, j) = a(i, j);
    for (std::size_t j = 0; j < m; ++j) r(i, n + j) = b(i, j);
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) r(n + i, j) = c(i, j);
    for (std::size_t j = 0; j < m; ++j) r(n + i, n + j) = d(i, j);
  }
  return r;
}

// ---------------------------------------------------------------------------
// symmetric eigenproblem

struct SymmetricEigen {
  Vector values;   ///< ascending
  Matrix vectors;  ///< column k is the eigenvector for values[k]
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// rel_tol * ||M||_F. Throws NotSymmetricError if |M - M^T| exceeds sym_tol
/// (relative to max|M|).
inline SymmetricEigen jacobi_eigen(const Matrix& m, double rel_tol = 1e-12,
                                   double sym_tol = 1e-10) {
  if (!m.is_square()) throw DimensionError("eigenvalues of non-square matrix");
  if (asymmetry(m) > sym_tol) throw NotSymmetricError("matrix is not symmetric");
  const std::size_t n = m.rows();
  Matrix a = symmetric_part(m);
  Matrix v = Matrix::identity(n);
  const double scale = frobenius_norm(a);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps && scale > 0.0; ++sweep) {
    if (off_norm() <= rel_tol * scale) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

inline double max_eigenvalue(const Matrix& m) { return jacobi_eigen(m).values.back(); }
inline double min_eigenvalue(const Matrix& m) { return jacobi_eigen(m).values.front(); }

inline bool is_positive_definite(const Matrix& m) {
  return m.is_square() && m.rows() > 0 && min_eigenvalue(m) > 0.0;
}

/// Induced 2-norm, sqrt(lambda_max(A^T A)).
inline double spectral_norm(const Matrix& a) {
  const Matrix ata = a.transpose() * a;
  return std::sqrt(std::max(0.0, max_eigenvalue(symmetric_part(ata))));
}

// ---------------------------------------------------------------------------
// dense solves

/// Solves A X = B by Gaussian elimination with partial pivoting. Throws
/// SingularMatrixError when a pivot falls below pivot_tol * max|A|.
inline Matrix solve(Matrix a, Matrix b, double pivot_tol = 1e-13) {
  if (!a.is_square() || a.rows() != b.rows()) throw DimensionError("solve shape mismatch");
  const std::size_t n = a.rows();
  const std::size_t m = b.cols();
  const double scale = std::max(max_abs(a), std::numeric_limits<double>::min());
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (std::abs(a(piv, col)) <= pivot_tol * scale)
      throw SingularMatrixError("singular linear system at column " + std::to_string(col));
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
      for (std::size_t j = 0; j < m; ++j) std::swap(b(col, j), b(piv, j));
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
      for (std::size_t j = 0; j < m; ++j) b(r, j) -= f * b(col, j);
    }
  }
  Matrix x(n, m);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t ii = n; ii-- > 0;) {
      double s = b(ii, j);
      for (std::size_t k = ii + 1; k < n; ++k) s -= a(ii, k) * x(k, j);
      x(ii, j) = s / a(ii, ii);
    }
  }
  return x;
}

// ---------------------------------------------------------------------------
// matrix exponential

/// Scaling and squaring with a degree-6 diagonal Padé approximant. The
/// scaling exponent brings ||A/2^s||_inf below 0.5.
inline Matrix expm(const Matrix& a) {
  if (!a.is_square()) throw DimensionError("expm of non-square matrix");
  const std::size_t n = a.rows();
  double inf_norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(a(i, j));
    inf_norm = std::max(inf_norm, row);
  }
  int s = 0;
  if (inf_norm > 0.5) s = std::max(0, static_cast<int>(std::ceil(std::log2(inf_norm / 0.5))));
  const Matrix x = a * std::ldexp(1.0, -s);

  constexpr int q = 6;
  double c = 1.0;
  Matrix power = Matrix::identity(n);
  Matrix num = Matrix::identity(n);
  Matrix den = Matrix::identity(n);
  for (int k = 1; k <= q; ++k) {
    c *= static_cast<double>(q - k + 1) / static_cast<double>(k * (2 * q - k + 1));
    power = power * x;
    num += c * power;
    den += ((k % 2 == 0) ? c : -c) * power;
  }
  Matrix e = solve(den, num);
  for (int k = 0; k < s; ++k) e = e * e;
  return e;
}

}  // namespace esc
