// sdl/problem.hpp

#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "sdl/classifier.hpp"
#include "sdl/constraints.hpp"
#include "sdl/dense_matrix.hpp"

namespace sdl {

enum class Mode { Filter, Feature };

// Per-block constraints for the separate-variable parameterization.
struct BlockConstraints {
  ConstraintSpec dict;  // W
  ConstraintSpec code;  // H
  ConstraintSpec beta;  // beta
  ConstraintSpec aux;   // Gamma
};

// A supervised dictionary learning instance: data, labels, and all
// hyperparameters. Columns are samples; labels take values in {0..kappa}
// with 0 the reference class. q = 0 (no auxiliary covariates) is valid and
// drops every Gamma term.
struct SdlProblem {
  DenseMatrix x_data;       // p x n
  DenseMatrix x_aux;        // q x n
  std::vector<int> labels;  // length n
  std::size_t kappa = 1;
  std::size_t rank = 1;
  double xi = 0.0;
  double nu = 0.0;
  Mode mode = Mode::Filter;
  ScoreFunction h = score_exp();
  BlockConstraints constraints;
  ConstraintSpec lifted_constraint;  // Theta for the combined lifted variable

  std::size_t p() const { return x_data.rows(); }
  std::size_t q() const { return x_aux.rows(); }
  std::size_t n() const { return x_data.cols(); }

  void validate() const {
    if (x_data.rows() == 0 || x_data.cols() == 0)
      throw std::invalid_argument("SdlProblem: empty data matrix");
    if (x_aux.rows() > 0 && x_aux.cols() != x_data.cols())
      throw std::invalid_argument("SdlProblem: aux column count mismatch");
    if (labels.size() != x_data.cols())
      throw std::invalid_argument("SdlProblem: label count mismatch");
    for (int y : labels)
      if (y < 0 || static_cast<std::size_t>(y) > kappa)
        throw std::invalid_argument("SdlProblem: label out of range");
    if (kappa < 1) throw std::invalid_argument("SdlProblem: kappa must be >= 1");
    if (rank < 1 || rank > std::min(x_data.rows(), x_data.cols()))
      throw std::invalid_argument("SdlProblem: rank out of range");
    if (xi < 0.0 || nu < 0.0)
      throw std::invalid_argument("SdlProblem: xi and nu must be >= 0");
  }
};

// Separate-variable parameters (W, H, beta, Gamma).
struct FactorState {
  DenseMatrix w;      // p x r
  DenseMatrix h;      // r x n
  DenseMatrix beta;   // r x kappa
  DenseMatrix gamma;  // q x kappa

  static FactorState zeros(const SdlProblem &prob) {
    FactorState s;
    s.w = DenseMatrix(prob.p(), prob.rank);
    s.h = DenseMatrix(prob.rank, prob.n());
    s.beta = DenseMatrix(prob.rank, prob.kappa);
    s.gamma = DenseMatrix(prob.q(), prob.kappa);
    return s;
  }

  void check_shapes(const SdlProblem &prob) const {
    if (w.rows() != prob.p() || w.cols() != prob.rank ||
        h.rows() != prob.rank || h.cols() != prob.n() ||
        beta.rows() != prob.rank || beta.cols() != prob.kappa ||
        gamma.rows() != prob.q() || gamma.cols() != prob.kappa)
      throw std::invalid_argument("FactorState: shape mismatch with problem");
  }
};

// Lifted parameters (A, B, Gamma). In Filter mode A is p x kappa and the
// rank constraint binds the horizontal stack [A, B]; in Feature mode A is
// kappa x n and the constraint binds the vertical stack [A; B].
struct LiftedState {
  DenseMatrix a;
  DenseMatrix b;      // p x n
  DenseMatrix gamma;  // q x kappa

  static LiftedState zeros(const SdlProblem &prob) {
    LiftedState z;
    z.a = prob.mode == Mode::Filter ? DenseMatrix(prob.p(), prob.kappa)
                                    : DenseMatrix(prob.kappa, prob.n());
    z.b = DenseMatrix(prob.p(), prob.n());
    z.gamma = DenseMatrix(prob.q(), prob.kappa);
    return z;
  }

  void check_shapes(const SdlProblem &prob) const {
    const bool a_ok = prob.mode == Mode::Filter
                          ? (a.rows() == prob.p() && a.cols() == prob.kappa)
                          : (a.rows() == prob.kappa && a.cols() == prob.n());
    if (!a_ok || b.rows() != prob.p() || b.cols() != prob.n() ||
        gamma.rows() != prob.q() || gamma.cols() != prob.kappa)
      throw std::invalid_argument("LiftedState: shape mismatch with problem");
  }
};

// Activation vector for sample s: beta^T W^T x_s + Gamma^T x'_s in Filter
// mode, beta^T h_s + Gamma^T x'_s in Feature mode.
inline std::vector<double> activation(const SdlProblem &prob, std::size_t s,
                                      const FactorState &state) {
  if (s >= prob.n()) throw std::invalid_argument("activation: sample index");
  state.check_shapes(prob);
  std::vector<double> a(prob.kappa, 0.0);
  if (prob.mode == Mode::Filter) {
    // t = W^T x_s, then a = beta^T t.
    std::vector<double> t(prob.rank, 0.0);
    for (std::size_t i = 0; i < prob.rank; ++i)
      for (std::size_t row = 0; row < prob.p(); ++row)
        t[i] += state.w(row, i) * prob.x_data(row, s);
    for (std::size_t j = 0; j < prob.kappa; ++j)
      for (std::size_t i = 0; i < prob.rank; ++i)
        a[j] += state.beta(i, j) * t[i];
  } else {
    for (std::size_t j = 0; j < prob.kappa; ++j)
      for (std::size_t i = 0; i < prob.rank; ++i)
        a[j] += state.beta(i, j) * state.h(i, s);
  }
  for (std::size_t j = 0; j < prob.kappa; ++j)
    for (std::size_t c = 0; c < prob.q(); ++c)
      a[j] += state.gamma(c, j) * prob.x_aux(c, s);
  return a;
}

// All activations at once as a kappa x n matrix.
inline DenseMatrix activation_matrix(const SdlProblem &prob,
                                     const FactorState &state) {
  state.check_shapes(prob);
  DenseMatrix act;
  if (prob.mode == Mode::Filter) {
    act = matmul(state.beta, matmul(state.w, prob.x_data, true), true);
  } else {
    act = matmul(state.beta, state.h, true);
  }
  if (prob.q() > 0) act.add_scaled(matmul(state.gamma, prob.x_aux, true), 1.0);
  return act;
}

}  // namespace sdl
