// sdl/svd.hpp

#pragma once

#include <cfloat>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "sdl/dense_matrix.hpp"

namespace sdl {

// Economy-size singular value decomposition A = U diag(s) V^T with
// U: m x k, V: n x k, k = min(m, n), singular values descending.
struct SvdResult {
  DenseMatrix u;
  std::vector<double> sigma;
  DenseMatrix v;
};

namespace detail {

inline double hypot2(double a, double b) { return std::hypot(a, b); }

// Householder bidiagonalization of a copy of A (m >= n), accumulating the
// economy left factor (m x n) and the right factor (n x n). On return
// d holds the diagonal and e the superdiagonal of the bidiagonal matrix.
inline void bidiagonalize(DenseMatrix a, DenseMatrix *u, DenseMatrix *v,
                          std::vector<double> *d, std::vector<double> *e) {
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<std::vector<double>> left_vs(n), right_vs(n);
  std::vector<double> left_tau(n, 0.0), right_tau(n, 0.0);

  for (std::size_t k = 0; k < n; ++k) {
    // Left Householder zeroing A[k+1:m, k].
    {
      double norm = 0.0;
      for (std::size_t i = k; i < m; ++i) norm = hypot2(norm, a(i, k));
      double beta = a(k, k) >= 0.0 ? -norm : norm;
      std::vector<double> hv(m - k, 0.0);
      double tau = 0.0;
      if (norm != 0.0 && beta != a(k, k)) {
        for (std::size_t i = k; i < m; ++i) hv[i - k] = a(i, k);
        hv[0] -= beta;
        double vn2 = 0.0;
        for (double x : hv) vn2 += x * x;
        tau = 2.0 / vn2;
        for (std::size_t j = k; j < n; ++j) {
          double proj = 0.0;
          for (std::size_t i = k; i < m; ++i) proj += hv[i - k] * a(i, j);
          proj *= tau;
          for (std::size_t i = k; i < m; ++i) a(i, j) -= proj * hv[i - k];
        }
      } else {
        beta = a(k, k);
      }
      (*d).push_back(beta);
      left_vs[k] = std::move(hv);
      left_tau[k] = tau;
    }
    // Right Householder zeroing A[k, k+2:n].
    if (k + 2 < n) {
      double norm = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) norm = hypot2(norm, a(k, j));
      double beta = a(k, k + 1) >= 0.0 ? -norm : norm;
      std::vector<double> hv(n - k - 1, 0.0);
      double tau = 0.0;
      if (norm != 0.0 && beta != a(k, k + 1)) {
        for (std::size_t j = k + 1; j < n; ++j) hv[j - k - 1] = a(k, j);
        hv[0] -= beta;
        double vn2 = 0.0;
        for (double x : hv) vn2 += x * x;
        tau = 2.0 / vn2;
        for (std::size_t i = k; i < m; ++i) {
          double proj = 0.0;
          for (std::size_t j = k + 1; j < n; ++j) proj += hv[j - k - 1] * a(i, j);
          proj *= tau;
          for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= proj * hv[j - k - 1];
        }
      } else {
        beta = a(k, k + 1);
      }
      (*e).push_back(beta);
      right_vs[k] = std::move(hv);
      right_tau[k] = tau;
    } else if (k + 2 == n) {
      (*e).push_back(a(k, k + 1));
    }
  }

  // U = H_0 ... H_{n-1} restricted to the first n columns of the identity.
  *u = DenseMatrix(m, n);
  for (std::size_t j = 0; j < n; ++j) (*u)(j, j) = 1.0;
  for (std::size_t k = n; k-- > 0;) {
    if (left_tau[k] == 0.0) continue;
    const std::vector<double> &hv = left_vs[k];
    for (std::size_t j = 0; j < n; ++j) {
      double proj = 0.0;
      for (std::size_t i = k; i < m; ++i) proj += hv[i - k] * (*u)(i, j);
      proj *= left_tau[k];
      for (std::size_t i = k; i < m; ++i) (*u)(i, j) -= proj * hv[i - k];
    }
  }

  // V = G_0 ... G_{n-3} built up the same way.
  *v = DenseMatrix::identity(n);
  for (std::size_t k = n; k-- > 0;) {
    if (right_tau[k] == 0.0) continue;
    const std::vector<double> &hv = right_vs[k];
    for (std::size_t j = 0; j < n; ++j) {
      double proj = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) proj += hv[i - k - 1] * (*v)(i, j);
      proj *= right_tau[k];
      for (std::size_t i = k + 1; i < n; ++i) (*v)(i, j) -= proj * hv[i - k - 1];
    }
  }
}

// Implicit-shift QR iteration on the bidiagonal (d, e), rotations accumulated
// into the columns of u and v. Classic Golub-Kahan sweep with deflation.
inline void bidiagonal_qr(std::vector<double> &d, std::vector<double> &e,
                          DenseMatrix &u, DenseMatrix &v) {
  const std::size_t n = d.size();
  if (n == 0) return;
  double bnorm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double t = std::fabs(d[i]) + (i + 1 < n ? std::fabs(e[i]) : 0.0);
    bnorm = std::max(bnorm, t);
  }
  if (bnorm == 0.0) return;
  const double eps = DBL_EPSILON;
  const std::size_t m_rows = u.rows(), n_rows = v.rows();

  auto rotate_cols = [](DenseMatrix &w, std::size_t rows, std::size_t p,
                        std::size_t q, double c, double s) {
    for (std::size_t i = 0; i < rows; ++i) {
      const double wp = w(i, p), wq = w(i, q);
      w(i, p) = wp * c + wq * s;
      w(i, q) = wq * c - wp * s;
    }
  };

  for (std::size_t k = n; k-- > 0;) {
    for (int iter = 0;; ++iter) {
      if (iter >= 60)
        throw std::runtime_error("svd_full: QR iteration did not converge");
      // Find the active block [l, k]; deflate negligible superdiagonals.
      bool cancel = false;
      std::size_t l = k;
      while (l > 0) {
        if (std::fabs(e[l - 1]) <= eps * bnorm) {
          e[l - 1] = 0.0;
          break;
        }
        if (std::fabs(d[l - 1]) <= eps * bnorm) {
          cancel = true;
          break;
        }
        --l;
      }
      if (cancel) {
        // d[l-1] is negligible: rotate e[l-1] away down the block.
        double c = 0.0, s = 1.0;
        for (std::size_t i = l; i <= k; ++i) {
          const double f = s * e[i - 1];
          e[i - 1] = c * e[i - 1];
          if (std::fabs(f) <= eps * bnorm) break;
          const double g = d[i];
          const double h = hypot2(f, g);
          d[i] = h;
          c = g / h;
          s = -f / h;
          rotate_cols(u, m_rows, l - 1, i, c, s);
        }
      }
      if (l == k) {
        if (d[k] < 0.0) {
          d[k] = -d[k];
          for (std::size_t i = 0; i < n_rows; ++i) v(i, k) = -v(i, k);
        }
        break;
      }
      // Wilkinson-shifted implicit QR step on [l, k].
      double x = d[l];
      const double y = d[k - 1];
      const double z = d[k];
      const double g0 = (k >= 2) ? e[k - 2] : 0.0;
      const double h0 = e[k - 1];
      double f =
          ((y - z) * (y + z) + (g0 - h0) * (g0 + h0)) / (2.0 * h0 * y);
      const double gg = hypot2(f, 1.0);
      f = ((x - z) * (x + z) +
           h0 * (y / (f + (f >= 0.0 ? gg : -gg)) - h0)) /
          x;
      double c = 1.0, s = 1.0;
      for (std::size_t j = l; j < k; ++j) {
        const std::size_t i = j + 1;
        double g = e[j];
        double yy = d[i];
        double h = s * g;
        g = c * g;
        double zz = hypot2(f, h);
        if (j > 0) e[j - 1] = zz;
        c = f / zz;
        s = h / zz;
        f = x * c + g * s;
        g = g * c - x * s;
        h = yy * s;
        yy *= c;
        rotate_cols(v, n_rows, j, i, c, s);
        zz = hypot2(f, h);
        d[j] = zz;
        if (zz != 0.0) {
          c = f / zz;
          s = h / zz;
        }
        f = c * g + s * yy;
        x = c * yy - s * g;
        rotate_cols(u, m_rows, j, i, c, s);
      }
      if (l > 0) e[l - 1] = 0.0;
      e[k - 1] = f;
      d[k] = x;
    }
  }
}

// Deterministic sign fix: in each left singular vector the entry of largest
// magnitude (lowest index on ties) is made non-negative.
inline void apply_sign_convention(DenseMatrix &u, DenseMatrix &v) {
  for (std::size_t j = 0; j < u.cols(); ++j) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < u.rows(); ++i) {
      const double mag = std::fabs(u(i, j));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    if (u(arg, j) < 0.0) {
      for (std::size_t i = 0; i < u.rows(); ++i) u(i, j) = -u(i, j);
      for (std::size_t i = 0; i < v.rows(); ++i) v(i, j) = -v(i, j);
    }
  }
}

inline SvdResult svd_tall(const DenseMatrix &a) {
  DenseMatrix u, v;
  std::vector<double> d, e;
  bidiagonalize(a, &u, &v, &d, &e);
  bidiagonal_qr(d, e, u, v);
  // Sort triplets by descending singular value.
  const std::size_t n = d.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t arg = i;
    for (std::size_t j = i + 1; j < n; ++j)
      if (d[j] > d[arg]) arg = j;
    if (arg != i) {
      std::swap(d[i], d[arg]);
      for (std::size_t r = 0; r < u.rows(); ++r) std::swap(u(r, i), u(r, arg));
      for (std::size_t r = 0; r < v.rows(); ++r) std::swap(v(r, i), v(r, arg));
    }
  }
  return SvdResult{std::move(u), std::move(d), std::move(v)};
}

}  // namespace detail

inline SvdResult svd_full(const DenseMatrix &a) {
  if (a.rows() == 0 || a.cols() == 0)
    throw std::invalid_argument("svd_full: empty matrix");
  for (std::size_t k = 0; k < a.size(); ++k)
    if (!std::isfinite(a.data()[k]))
      throw std::invalid_argument("svd_full: non-finite entry");
  SvdResult res;
  if (a.rows() >= a.cols()) {
    res = detail::svd_tall(a);
  } else {
    SvdResult t = detail::svd_tall(transpose(a));
    res = SvdResult{std::move(t.v), std::move(t.sigma), std::move(t.u)};
  }
  detail::apply_sign_convention(res.u, res.v);
  return res;
}

// Nearest matrix of rank at most r in Frobenius norm: keep the r leading
// singular triplets. Requesting r >= min(m, n) returns the input unchanged.
inline DenseMatrix rank_r_project(const DenseMatrix &a, std::size_t r) {
  if (r == 0) throw std::invalid_argument("rank_r_project: rank must be >= 1");
  const std::size_t k = std::min(a.rows(), a.cols());
  if (r >= k) return a;
  SvdResult svd = svd_full(a);
  DenseMatrix out(a.rows(), a.cols());
  for (std::size_t t = 0; t < r; ++t)
    for (std::size_t i = 0; i < a.rows(); ++i) {
      const double uis = svd.u(i, t) * svd.sigma[t];
      if (uis == 0.0) continue;
      for (std::size_t j = 0; j < a.cols(); ++j)
        out(i, j) += uis * svd.v(j, t);
    }
  return out;
}

}  // namespace sdl
