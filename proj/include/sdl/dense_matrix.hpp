// sdl/dense_matrix.hpp

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdl {

// Dense row-major matrix of doubles. Everything in this library that is not a
// scalar or a label vector goes through this type; operations allocate their
// results and never alias.
class DenseMatrix {
 public:
  DenseMatrix() : rows_(0), cols_(0) {}

  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  // Row-literal constructor for tests and small fixtures.
  static DenseMatrix from_rows(
      std::initializer_list<std::initializer_list<double>> rows) {
    DenseMatrix m(rows.size(), rows.size() == 0 ? 0 : rows.begin()->size());
    std::size_t i = 0;
    for (const auto &row : rows) {
      if (row.size() != m.cols_)
        throw std::invalid_argument("from_rows: ragged row literal");
      std::size_t j = 0;
      for (double v : row) m(i, j++) = v;
      ++i;
    }
    return m;
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double &operator()(std::size_t i, std::size_t j) {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }

  double *data() { return data_.data(); }
  const double *data() const { return data_.data(); }

  bool same_shape(const DenseMatrix &other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  void scale(double s) {
    for (double &v : data_) v *= s;
  }

  // this += s * other
  void add_scaled(const DenseMatrix &other, double s) {
    if (!same_shape(other))
      throw std::invalid_argument("add_scaled: shape mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += s * other.data_[k];
  }

  void set_block(std::size_t r0, std::size_t c0, const DenseMatrix &b) {
    if (r0 + b.rows_ > rows_ || c0 + b.cols_ > cols_)
      throw std::invalid_argument("set_block: block out of range");
    for (std::size_t i = 0; i < b.rows_; ++i)
      for (std::size_t j = 0; j < b.cols_; ++j) (*this)(r0 + i, c0 + j) = b(i, j);
  }

 private:
  std::size_t rows_, cols_;
  std::vector<double> data_;
};

inline DenseMatrix operator+(const DenseMatrix &a, const DenseMatrix &b) {
  if (!a.same_shape(b)) throw std::invalid_argument("operator+: shape mismatch");
  DenseMatrix c = a;
  c.add_scaled(b, 1.0);
  return c;
}

inline DenseMatrix operator-(const DenseMatrix &a, const DenseMatrix &b) {
  if (!a.same_shape(b)) throw std::invalid_argument("operator-: shape mismatch");
  DenseMatrix c = a;
  c.add_scaled(b, -1.0);
  return c;
}

inline DenseMatrix operator*(double s, const DenseMatrix &a) {
  DenseMatrix c = a;
  c.scale(s);
  return c;
}

inline DenseMatrix operator*(const DenseMatrix &a, double s) { return s * a; }

// Matrix product with optional transposes, C = op(A) op(B).
inline DenseMatrix matmul(const DenseMatrix &a, const DenseMatrix &b,
                          bool trans_a = false, bool trans_b = false) {
  const std::size_t m = trans_a ? a.cols() : a.rows();
  const std::size_t ka = trans_a ? a.rows() : a.cols();
  const std::size_t kb = trans_b ? b.cols() : b.rows();
  const std::size_t n = trans_b ? b.rows() : b.cols();
  if (ka != kb) throw std::invalid_argument("matmul: inner dimension mismatch");
  DenseMatrix c(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < ka; ++k) {
      const double aik = trans_a ? a(k, i) : a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j)
        c(i, j) += aik * (trans_b ? b(j, k) : b(k, j));
    }
  }
  return c;
}

inline DenseMatrix operator*(const DenseMatrix &a, const DenseMatrix &b) {
  return matmul(a, b);
}

inline DenseMatrix transpose(const DenseMatrix &a) {
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

// Frobenius norm, computed with a running rescale so that large and tiny
// entries do not overflow or underflow the sum of squares.
inline double frobenius_norm(const DenseMatrix &a) {
  double scale = 0.0, ssq = 1.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double v = std::fabs(a.data()[k]);
    if (v == 0.0) continue;
    if (scale < v) {
      ssq = 1.0 + ssq * (scale / v) * (scale / v);
      scale = v;
    } else {
      ssq += (v / scale) * (v / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

// Frobenius inner product <A, B>.
inline double dot(const DenseMatrix &a, const DenseMatrix &b) {
  if (!a.same_shape(b)) throw std::invalid_argument("dot: shape mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a.data()[k] * b.data()[k];
  return s;
}

inline double max_abs(const DenseMatrix &a) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    m = std::max(m, std::fabs(a.data()[k]));
  return m;
}

inline DenseMatrix submatrix(const DenseMatrix &a, std::size_t r0,
                             std::size_t r1, std::size_t c0, std::size_t c1) {
  if (r1 < r0 || c1 < c0 || r1 > a.rows() || c1 > a.cols())
    throw std::invalid_argument("submatrix: range out of bounds");
  DenseMatrix b(r1 - r0, c1 - c0);
  for (std::size_t i = r0; i < r1; ++i)
    for (std::size_t j = c0; j < c1; ++j) b(i - r0, j - c0) = a(i, j);
  return b;
}

inline DenseMatrix hstack(const DenseMatrix &a, const DenseMatrix &b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("hstack: row mismatch");
  DenseMatrix c(a.rows(), a.cols() + b.cols());
  c.set_block(0, 0, a);
  c.set_block(0, a.cols(), b);
  return c;
}

inline DenseMatrix vstack(const DenseMatrix &a, const DenseMatrix &b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("vstack: col mismatch");
  DenseMatrix c(a.rows() + b.rows(), a.cols());
  c.set_block(0, 0, a);
  c.set_block(a.rows(), 0, b);
  return c;
}

inline DenseMatrix get_col(const DenseMatrix &a, std::size_t j) {
  return submatrix(a, 0, a.rows(), j, j + 1);
}

// Column-major stacking vec(A): entry j*rows + i holds A(i, j). All Kronecker
// identities in this library (vec(AXB) = (B^T (x) A) vec X and friends) assume
// this ordering.
inline DenseMatrix vec(const DenseMatrix &a) {
  DenseMatrix v(a.rows() * a.cols(), 1);
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) v(j * a.rows() + i, 0) = a(i, j);
  return v;
}

inline DenseMatrix unvec(const DenseMatrix &v, std::size_t rows,
                         std::size_t cols) {
  if (v.cols() != 1 || v.rows() != rows * cols)
    throw std::invalid_argument("unvec: length does not match target shape");
  DenseMatrix a(rows, cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) a(i, j) = v(j * rows + i, 0);
  return a;
}

// Kronecker product, block (i, j) of the result equals A(i, j) * B.
inline DenseMatrix kron(const DenseMatrix &a, const DenseMatrix &b) {
  DenseMatrix c(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double aij = a(i, j);
      if (aij == 0.0) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          c(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return c;
}

// Commutation matrix C^(m,n), the mn x mn permutation with
// C^(m,n) vec(A) = vec(A^T) for any m x n matrix A.
inline DenseMatrix commutation_matrix(std::size_t m, std::size_t n) {
  DenseMatrix c(m * n, m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) c(i * n + j, j * m + i) = 1.0;
  return c;
}

// Eigenvalues of a symmetric matrix in ascending order, computed by the
// cyclic Jacobi method. Intended for the small dense matrices that appear in
// curvature estimates and tests.
inline std::vector<double> symmetric_eigenvalues(const DenseMatrix &a) {
  const std::size_t n = a.rows();
  if (n != a.cols())
    throw std::invalid_argument("symmetric_eigenvalues: matrix not square");
  const double scale = std::max(max_abs(a), 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::fabs(a(i, j) - a(j, i)) > 1e-8 * scale)
        throw std::invalid_argument("symmetric_eigenvalues: matrix not symmetric");

  DenseMatrix w = a;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (w(i, j) + w(j, i));
      w(i, j) = w(j, i) = v;
    }

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += w(i, j) * w(i, j);
    if (std::sqrt(2.0 * off) <= 1e-14 * scale * n) {
      std::vector<double> eig(n);
      for (std::size_t i = 0; i < n; ++i) eig[i] = w(i, i);
      std::sort(eig.begin(), eig.end());
      return eig;
    }
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::fabs(w(p, q)) <= 1e-300) continue;
        const double theta = (w(q, q) - w(p, p)) / (2.0 * w(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double wkp = w(k, p), wkq = w(k, q);
          w(k, p) = c * wkp - s * wkq;
          w(k, q) = s * wkp + c * wkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double wpk = w(p, k), wqk = w(q, k);
          w(p, k) = c * wpk - s * wqk;
          w(q, k) = s * wpk + c * wqk;
        }
      }
  }
  throw std::runtime_error("symmetric_eigenvalues: Jacobi sweeps did not converge");
}

}  // namespace sdl
