// sdl/classifier.hpp

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdl/dense_matrix.hpp"

namespace sdl {

// Nonnegative score function h turning activations into unnormalized class
// scores; h = exp recovers the multinomial logit model.
struct ScoreFunction {
  std::function<double(double)> eval;
  std::function<double(double)> deriv1;
  std::function<double(double)> deriv2;
  std::string tag;
};

inline ScoreFunction score_exp() {
  auto e = [](double x) { return std::exp(x); };
  return ScoreFunction{e, e, e, "exp"};
}

inline ScoreFunction score_softplus() {
  auto eval = [](double x) {
    // log(1 + e^x) without overflow for large |x|.
    return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
  };
  auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  auto deriv2 = [sigmoid](double x) {
    const double s = sigmoid(x);
    return s * (1.0 - s);
  };
  return ScoreFunction{eval, sigmoid, deriv2, "softplus"};
}

namespace detail {

// log(1 + sum_c exp(a_c)), stabilized against overflow.
inline double log1p_sum_exp(const std::vector<double> &a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, v);
  double s = std::exp(-m);
  for (double v : a) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace detail

// Class distribution (g_0, g_1, ..., g_kappa) with g_0 the reference class:
// g_0 = 1/(1 + sum h(a_c)), g_j = h(a_j)/(1 + sum h(a_c)).
inline std::vector<double> predictive_distribution(const std::vector<double> &a,
                                                   const ScoreFunction &h) {
  const std::size_t kappa = a.size();
  std::vector<double> g(kappa + 1);
  if (h.tag == "exp") {
    const double lse = detail::log1p_sum_exp(a);
    g[0] = std::exp(-lse);
    for (std::size_t j = 0; j < kappa; ++j) g[j + 1] = std::exp(a[j] - lse);
    return g;
  }
  double denom = 1.0;
  std::vector<double> hv(kappa);
  for (std::size_t j = 0; j < kappa; ++j) {
    hv[j] = h.eval(a[j]);
    if (!std::isfinite(hv[j]))
      throw std::runtime_error("predictive_distribution: score overflow");
    denom += hv[j];
  }
  if (!std::isfinite(denom))
    throw std::runtime_error("predictive_distribution: score overflow");
  g[0] = 1.0 / denom;
  for (std::size_t j = 0; j < kappa; ++j) g[j + 1] = hv[j] / denom;
  return g;
}

// Per-sample negative log likelihood -log g_y(a). When g_y underflows to
// exactly zero the function returns +infinity and raises *infinite instead of
// producing a NaN.
inline double nll(int y, const std::vector<double> &a, const ScoreFunction &h,
                  bool *infinite = nullptr) {
  const std::size_t kappa = a.size();
  if (y < 0 || static_cast<std::size_t>(y) > kappa)
    throw std::invalid_argument("nll: label out of range");
  if (infinite) *infinite = false;
  if (h.tag == "exp") {
    const double lse = detail::log1p_sum_exp(a);
    return y == 0 ? lse : lse - a[y - 1];
  }
  const std::vector<double> g = predictive_distribution(a, h);
  const double gy = g[static_cast<std::size_t>(y)];
  if (gy <= 0.0) {
    if (infinite) *infinite = true;
    return std::numeric_limits<double>::infinity();
  }
  return -std::log(gy);
}

// Gradient of nll with respect to the activation. For h = exp this is
// g_j(a) - 1(y = j).
inline std::vector<double> hdot(int y, const std::vector<double> &a,
                                const ScoreFunction &h) {
  const std::size_t kappa = a.size();
  if (y < 0 || static_cast<std::size_t>(y) > kappa)
    throw std::invalid_argument("hdot: label out of range");
  std::vector<double> out(kappa);
  if (h.tag == "exp") {
    const std::vector<double> g = predictive_distribution(a, h);
    for (std::size_t j = 0; j < kappa; ++j)
      out[j] = g[j + 1] - (static_cast<std::size_t>(y) == j + 1 ? 1.0 : 0.0);
    return out;
  }
  double denom = 1.0;
  for (std::size_t j = 0; j < kappa; ++j) denom += h.eval(a[j]);
  if (!std::isfinite(denom)) throw std::runtime_error("hdot: score overflow");
  for (std::size_t j = 0; j < kappa; ++j) {
    out[j] = h.deriv1(a[j]) / denom;
    if (static_cast<std::size_t>(y) == j + 1) {
      const double hj = h.eval(a[j]);
      if (hj == 0.0) throw std::runtime_error("hdot: score vanished at the label");
      out[j] -= h.deriv1(a[j]) / hj;
    }
  }
  return out;
}

// Hessian of nll with respect to the activation, a symmetric kappa x kappa
// matrix. For h = exp this is diag(g) - g g^T over the non-reference classes
// and does not depend on y.
inline DenseMatrix hddot(int y, const std::vector<double> &a,
                         const ScoreFunction &h) {
  const std::size_t kappa = a.size();
  if (y < 0 || static_cast<std::size_t>(y) > kappa)
    throw std::invalid_argument("hddot: label out of range");
  DenseMatrix out(kappa, kappa);
  if (h.tag == "exp") {
    const std::vector<double> g = predictive_distribution(a, h);
    for (std::size_t i = 0; i < kappa; ++i)
      for (std::size_t j = 0; j < kappa; ++j)
        out(i, j) = g[i + 1] * ((i == j ? 1.0 : 0.0) - g[j + 1]);
    return out;
  }
  double denom = 1.0;
  for (std::size_t j = 0; j < kappa; ++j) denom += h.eval(a[j]);
  if (!std::isfinite(denom)) throw std::runtime_error("hddot: score overflow");
  for (std::size_t i = 0; i < kappa; ++i)
    for (std::size_t j = 0; j < kappa; ++j) {
      double v = -h.deriv1(a[i]) * h.deriv1(a[j]) / (denom * denom);
      if (i == j) {
        v += h.deriv2(a[i]) / denom;
        if (static_cast<std::size_t>(y) == i + 1) {
          const double hi = h.eval(a[i]);
          if (hi == 0.0)
            throw std::runtime_error("hddot: score vanished at the label");
          const double ratio = h.deriv1(a[i]) / hi;
          v -= h.deriv2(a[i]) / hi - ratio * ratio;
        }
      }
      out(i, j) = v;
    }
  return out;
}

// Curvature constants for the multinomial-logit head under an activation
// norm bound M.
struct ClassBounds {
  double gamma_max;
  double alpha_minus;
  double alpha_plus;
  double m_bound;
};

// Closed-form stiffness and eigenvalue constants for h = exp. Note that for
// kappa = 1 these formulas give alpha_plus < alpha_minus at every M > 0;
// callers needing an ordered interval should compare the two fields.
inline ClassBounds logit_bounds(double m_bound, std::size_t kappa) {
  if (!(m_bound > 0.0)) throw std::invalid_argument("logit_bounds: M must be > 0");
  if (kappa < 1) throw std::invalid_argument("logit_bounds: kappa must be >= 1");
  const double em = std::exp(m_bound);
  const double emm = std::exp(-m_bound);
  const double km1 = static_cast<double>(kappa - 1);
  ClassBounds b;
  b.m_bound = m_bound;
  b.gamma_max = 1.0 + em / (1.0 + em + km1 * emm);
  b.alpha_minus = emm / (1.0 + emm + km1 * em);
  const double denom = 1.0 + em + km1 * emm;
  b.alpha_plus = em * (1.0 + 2.0 * km1 * em) / (denom * denom);
  return b;
}

}  // namespace sdl
