// sdl/loss.hpp

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sdl/classifier.hpp"
#include "sdl/dense_matrix.hpp"
#include "sdl/problem.hpp"

namespace sdl {

namespace detail {

inline std::vector<double> column_vector(const DenseMatrix &m, std::size_t j) {
  std::vector<double> v(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) v[i] = m(i, j);
  return v;
}

// K = [hdot(y_1, a_1), ..., hdot(y_n, a_n)] as a kappa x n matrix, given the
// activation matrix.
inline DenseMatrix hdot_matrix(const SdlProblem &prob, const DenseMatrix &act) {
  DenseMatrix k(prob.kappa, prob.n());
  for (std::size_t s = 0; s < prob.n(); ++s) {
    const std::vector<double> g = hdot(prob.labels[s], column_vector(act, s), prob.h);
    for (std::size_t j = 0; j < prob.kappa; ++j) k(j, s) = g[j];
  }
  return k;
}

inline double nll_sum(const SdlProblem &prob, const DenseMatrix &act) {
  double total = 0.0;
  for (std::size_t s = 0; s < prob.n(); ++s) {
    bool infinite = false;
    total += nll(prob.labels[s], column_vector(act, s), prob.h, &infinite);
    if (infinite)
      throw std::runtime_error("loss: likelihood vanished for a sample");
  }
  if (!std::isfinite(total)) throw std::runtime_error("loss: overflow");
  return total;
}

}  // namespace detail

// Separate-variable objective:
//   sum_s nll(y_s, a_s) + xi ||X - W H||_F^2 + nu * penalty
// with penalty ||W beta||_F^2 + ||Gamma||_F^2 in Filter mode and
// ||beta^T H||_F^2 + ||Gamma||_F^2 in Feature mode.
inline double loss_separate(const SdlProblem &prob, const FactorState &state) {
  state.check_shapes(prob);
  const DenseMatrix act = activation_matrix(prob, state);
  double total = detail::nll_sum(prob, act);
  const DenseMatrix residual = matmul(state.w, state.h) - prob.x_data;
  const double rn = frobenius_norm(residual);
  total += prob.xi * rn * rn;
  if (prob.nu > 0.0) {
    double reg = 0.0;
    if (prob.mode == Mode::Filter) {
      const double wb = frobenius_norm(matmul(state.w, state.beta));
      reg = wb * wb;
    } else {
      const double bh = frobenius_norm(matmul(state.beta, state.h, true));
      reg = bh * bh;
    }
    const double gn = frobenius_norm(state.gamma);
    total += prob.nu * (reg + gn * gn);
  }
  if (!std::isfinite(total)) throw std::runtime_error("loss_separate: overflow");
  return total;
}

// Analytic gradient of loss_separate, one matrix per block.
inline FactorState grad_blocks(const SdlProblem &prob,
                               const FactorState &state) {
  state.check_shapes(prob);
  const DenseMatrix act = activation_matrix(prob, state);
  const DenseMatrix k = detail::hdot_matrix(prob, act);
  const DenseMatrix residual = matmul(state.w, state.h) - prob.x_data;

  FactorState g;
  if (prob.mode == Mode::Filter) {
    const DenseMatrix xkt = matmul(prob.x_data, k, false, true);  // p x kappa
    g.w = matmul(xkt, state.beta, false, true);
    g.w.add_scaled(matmul(residual, state.h, false, true), 2.0 * prob.xi);
    g.beta = matmul(state.w, xkt, true);
    g.h = 2.0 * prob.xi * matmul(state.w, residual, true);
    if (prob.nu > 0.0) {
      const DenseMatrix bbt = matmul(state.beta, state.beta, false, true);
      g.w.add_scaled(matmul(state.w, bbt), 2.0 * prob.nu);
      g.beta.add_scaled(
          matmul(matmul(state.w, state.w, true), state.beta), 2.0 * prob.nu);
    }
  } else {
    g.w = 2.0 * prob.xi * matmul(residual, state.h, false, true);
    g.beta = matmul(state.h, k, false, true);
    g.h = matmul(state.beta, k);
    g.h.add_scaled(matmul(state.w, residual, true), 2.0 * prob.xi);
    if (prob.nu > 0.0) {
      g.beta.add_scaled(
          matmul(matmul(state.h, state.h, false, true), state.beta),
          2.0 * prob.nu);
      g.h.add_scaled(
          matmul(matmul(state.beta, state.beta, false, true), state.h),
          2.0 * prob.nu);
    }
  }
  g.gamma = matmul(prob.x_aux, k, false, true);
  if (prob.nu > 0.0) g.gamma.add_scaled(state.gamma, 2.0 * prob.nu);
  return g;
}

// Lifted objective. Filter mode:
//   sum_s nll(y_s, A^T x_s + Gamma^T x'_s) + xi ||X - B||_F^2
//     + nu (||A||_F + ||Gamma||_F)^2
// Feature mode:
//   sum_s nll(y_s, A[:,s] + Gamma^T x'_s) + xi ||X - B||_F^2
//     + nu (||A||_F^2 + ||Gamma||_F^2)
// The two regularizer shapes are intentional and documented in the README.
inline DenseMatrix lifted_activations(const SdlProblem &prob,
                                      const LiftedState &z) {
  z.check_shapes(prob);
  DenseMatrix act = prob.mode == Mode::Filter
                        ? matmul(z.a, prob.x_data, true)
                        : z.a;
  if (prob.q() > 0) act.add_scaled(matmul(z.gamma, prob.x_aux, true), 1.0);
  return act;
}

inline double loss_lifted(const SdlProblem &prob, const LiftedState &z) {
  const DenseMatrix act = lifted_activations(prob, z);
  double total = detail::nll_sum(prob, act);
  const DenseMatrix residual = z.b - prob.x_data;
  const double rn = frobenius_norm(residual);
  total += prob.xi * rn * rn;
  if (prob.nu > 0.0) {
    const double an = frobenius_norm(z.a);
    const double gn = frobenius_norm(z.gamma);
    if (prob.mode == Mode::Filter) {
      total += prob.nu * (an + gn) * (an + gn);
    } else {
      total += prob.nu * (an * an + gn * gn);
    }
  }
  if (!std::isfinite(total)) throw std::runtime_error("loss_lifted: overflow");
  return total;
}

// Gradient of loss_lifted. At ||A||_F = 0 (or ||Gamma||_F = 0) the Filter
// regularizer's norm coupling is nonsmooth; the zero subgradient is used
// there, which only matters on a measure-zero set.
inline LiftedState grad_lifted(const SdlProblem &prob, const LiftedState &z) {
  const DenseMatrix act = lifted_activations(prob, z);
  const DenseMatrix k = detail::hdot_matrix(prob, act);

  LiftedState g;
  g.a = prob.mode == Mode::Filter ? matmul(prob.x_data, k, false, true) : k;
  g.b = 2.0 * prob.xi * (z.b - prob.x_data);
  g.gamma = matmul(prob.x_aux, k, false, true);
  if (prob.nu > 0.0) {
    if (prob.mode == Mode::Filter) {
      const double an = frobenius_norm(z.a);
      const double gn = frobenius_norm(z.gamma);
      const double fa = an > 0.0 ? 2.0 * prob.nu * (1.0 + gn / an) : 2.0 * prob.nu;
      const double fg = gn > 0.0 ? 2.0 * prob.nu * (1.0 + an / gn) : 2.0 * prob.nu;
      g.a.add_scaled(z.a, fa);
      g.gamma.add_scaled(z.gamma, fg);
    } else {
      g.a.add_scaled(z.a, 2.0 * prob.nu);
      g.gamma.add_scaled(z.gamma, 2.0 * prob.nu);
    }
  }
  return g;
}

}  // namespace sdl
