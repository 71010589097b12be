// sdl/solvers.hpp

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sdl/classifier.hpp"
#include "sdl/constraints.hpp"
#include "sdl/csv.hpp"
#include "sdl/dense_matrix.hpp"
#include "sdl/loss.hpp"
#include "sdl/problem.hpp"
#include "sdl/rng.hpp"
#include "sdl/svd.hpp"

namespace sdl {

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct IterationRecord {
  std::size_t iter = 0;
  double loss = 0.0;
  double stationarity = 0.0;
  double grad_mapping_norm = 0.0;
  double elapsed_s = 0.0;
};

struct SolverReport {
  std::vector<IterationRecord> records;
  std::string termination = "max_iters";
  bool rank_deficient = false;

  double final_loss() const {
    return records.empty() ? 0.0 : records.back().loss;
  }

  // Headerless numeric rows (iter, loss, stationarity, grad_mapping_norm)
  // so the file round-trips through the CSV loader. The wall-clock column is
  // opt-in so that default artifacts are byte-identical across re-runs with
  // the same config and seed.
  void save_csv(const std::string &path, bool include_timing = false) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
      throw std::runtime_error("SolverReport::save_csv: cannot open " + path);
    for (const IterationRecord &rec : records) {
      out << rec.iter << ',' << format_double(rec.loss) << ','
          << format_double(rec.stationarity) << ','
          << format_double(rec.grad_mapping_norm);
      if (include_timing) out << ',' << format_double(rec.elapsed_s);
      out << '\n';
    }
  }
};

namespace detail {

class WallTimer {
 public:
  WallTimer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Stationarity measures and the gradient mapping
// ---------------------------------------------------------------------------

// Worst-direction stationarity over a single constraint set: the norm of the
// negative gradient projected onto the tangent cone at the current point.
// Zero exactly at constrained stationary points; equals the gradient norm at
// interior points.
inline double epsilon_stationarity(const DenseMatrix &grad,
                                   const DenseMatrix &point,
                                   const ConstraintSpec &c) {
  return stationarity_measure(grad, point, c);
}

// Product-set version for block-structured problems: the tangent cone of a
// product set is the product of the cones, so the measures combine in
// quadrature.
inline double epsilon_stationarity(const std::vector<DenseMatrix> &grads,
                                   const std::vector<DenseMatrix> &points,
                                   const std::vector<ConstraintSpec> &cs) {
  if (grads.size() != points.size() || grads.size() != cs.size())
    throw std::invalid_argument("epsilon_stationarity: block count mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    const double m = stationarity_measure(grads[i], points[i], cs[i]);
    acc += m * m;
  }
  return std::sqrt(acc);
}

// Projected-gradient residual G = (Z - proj(Z - tau grad)) / tau. Zero iff the
// point is stationary over the constraint set; its norm never exceeds the
// gradient norm.
inline DenseMatrix gradient_mapping(const DenseMatrix &grad,
                                    const DenseMatrix &point, double tau,
                                    const ConstraintSpec &theta) {
  if (!(tau > 0.0))
    throw std::invalid_argument("gradient_mapping: tau must be positive");
  DenseMatrix stepped = point;
  stepped.add_scaled(grad, -tau);
  DenseMatrix residual = point - project_constraint(stepped, theta);
  residual.scale(1.0 / tau);
  return residual;
}

// ---------------------------------------------------------------------------
// LPGD on a stacked (matrix, aux) variable
// ---------------------------------------------------------------------------

// One low-rank-constrained matrix coordinate plus an auxiliary coordinate
// that is convex-projected but never rank-projected.
struct StackedPoint {
  DenseMatrix m;
  DenseMatrix aux;

  double distance(const StackedPoint &other) const {
    const double dm = frobenius_norm(m - other.m);
    const double da = frobenius_norm(aux - other.aux);
    return std::sqrt(dm * dm + da * da);
  }
};

struct StackedObjective {
  std::function<double(const StackedPoint &)> value;
  std::function<StackedPoint(const StackedPoint &)> grad;
};

struct LpgdConfig {
  double tau = 0.01;
  std::size_t iters = 100;
  std::size_t rank = 1;
  ConstraintSpec theta = ConstraintSpec::unbounded();      // stacked matrix
  ConstraintSpec aux_theta = ConstraintSpec::unbounded();  // aux coordinate
  double stat_tol = 0.0;  // early stop when stationarity drops below; 0 = off

  void validate() const {
    if (!(tau > 0.0)) throw std::invalid_argument("LpgdConfig: tau must be positive");
    if (iters == 0) throw std::invalid_argument("LpgdConfig: iters must be >= 1");
    if (rank == 0) throw std::invalid_argument("LpgdConfig: rank must be >= 1");
    theta.validate();
    aux_theta.validate();
  }
};

// Projected gradient descent with a rank-r projection of the matrix
// coordinate after the convex projection. Records loss, stationarity and
// gradient-mapping norm each iteration.
inline std::pair<StackedPoint, SolverReport> lpgd(const StackedObjective &f,
                                                  const LpgdConfig &cfg,
                                                  const StackedPoint &z0) {
  cfg.validate();
  const detail::WallTimer timer;
  StackedPoint z = z0;
  SolverReport report;
  for (std::size_t t = 1; t <= cfg.iters; ++t) {
    const StackedPoint g = f.grad(z);
    StackedPoint next;
    next.m = z.m;
    next.m.add_scaled(g.m, -cfg.tau);
    next.m = project_constraint(next.m, cfg.theta);
    next.aux = z.aux;
    if (next.aux.size() > 0) {
      next.aux.add_scaled(g.aux, -cfg.tau);
      next.aux = project_constraint(next.aux, cfg.aux_theta);
    }
    // Gradient mapping uses the convex projection only.
    const double gm_m = frobenius_norm(z.m - next.m);
    const double gm_a = frobenius_norm(z.aux - next.aux);
    const double gm_norm = std::sqrt(gm_m * gm_m + gm_a * gm_a) / cfg.tau;
    next.m = rank_r_project(next.m, cfg.rank);
    z = next;

    const double loss = f.value(z);
    if (!std::isfinite(loss))
      throw std::runtime_error("lpgd: non-finite loss at iteration " +
                               std::to_string(t));
    const StackedPoint g2 = f.grad(z);
    const double sm = epsilon_stationarity(g2.m, z.m, cfg.theta);
    const double sa = z.aux.size() > 0
                          ? epsilon_stationarity(g2.aux, z.aux, cfg.aux_theta)
                          : 0.0;
    const double stat = std::sqrt(sm * sm + sa * sa);
    report.records.push_back({t, loss, stat, gm_norm, timer.seconds()});
    if (cfg.stat_tol > 0.0 && stat <= cfg.stat_tol) {
      report.termination = "converged";
      return {z, report};
    }
  }
  report.termination = "max_iters";
  return {z, report};
}

// ---------------------------------------------------------------------------
// Convex lifted solvers with SVD factor recovery
// ---------------------------------------------------------------------------

struct ConvResult {
  FactorState factors;
  LiftedState lifted;
  SolverReport report;
};

namespace detail {

// Relative cutoff below which a singular value is treated as zero during
// factor recovery; the affected factor columns are zeroed and the report is
// flagged rank-deficient.
constexpr double kRecoverySingularTol = 1e-12;

// Split a rank-r SVD of the horizontal stack [A, B] (p x (kappa+n)) into
// W = U sqrt(S) and [beta, H] = sqrt(S) V^T with beta the first kappa
// columns.
inline FactorState recover_filter_factors(const DenseMatrix &stacked,
                                          std::size_t rank, std::size_t kappa,
                                          std::size_t n,
                                          const DenseMatrix &gamma,
                                          bool *rank_deficient) {
  const std::size_t p = stacked.rows();
  if (stacked.cols() != kappa + n)
    throw std::invalid_argument("recover_filter_factors: stack width mismatch");
  const SvdResult svd = svd_full(stacked);
  FactorState out;
  out.w = DenseMatrix(p, rank);
  out.h = DenseMatrix(rank, n);
  out.beta = DenseMatrix(rank, kappa);
  out.gamma = gamma;
  *rank_deficient = false;
  const double top = svd.sigma.empty() ? 0.0 : svd.sigma[0];
  for (std::size_t i = 0; i < rank; ++i) {
    if (i >= svd.sigma.size() || svd.sigma[i] <= kRecoverySingularTol * top ||
        top == 0.0) {
      *rank_deficient = true;
      continue;  // columns stay zero
    }
    const double s = std::sqrt(svd.sigma[i]);
    for (std::size_t a = 0; a < p; ++a) out.w(a, i) = s * svd.u(a, i);
    for (std::size_t j = 0; j < kappa; ++j) out.beta(i, j) = s * svd.v(j, i);
    for (std::size_t sidx = 0; sidx < n; ++sidx)
      out.h(i, sidx) = s * svd.v(kappa + sidx, i);
  }
  return out;
}

// Split a rank-r SVD of the vertical stack [A; B] ((kappa+p) x n) into
// [beta^T; W] = U sqrt(S) and H = sqrt(S) V^T.
inline FactorState recover_feature_factors(const DenseMatrix &stacked,
                                           std::size_t rank, std::size_t kappa,
                                           std::size_t p,
                                           const DenseMatrix &gamma,
                                           bool *rank_deficient) {
  const std::size_t n = stacked.cols();
  if (stacked.rows() != kappa + p)
    throw std::invalid_argument(
        "recover_feature_factors: stack height mismatch");
  const SvdResult svd = svd_full(stacked);
  FactorState out;
  out.w = DenseMatrix(p, rank);
  out.h = DenseMatrix(rank, n);
  out.beta = DenseMatrix(rank, kappa);
  out.gamma = gamma;
  *rank_deficient = false;
  const double top = svd.sigma.empty() ? 0.0 : svd.sigma[0];
  for (std::size_t i = 0; i < rank; ++i) {
    if (i >= svd.sigma.size() || svd.sigma[i] <= kRecoverySingularTol * top ||
        top == 0.0) {
      *rank_deficient = true;
      continue;
    }
    const double s = std::sqrt(svd.sigma[i]);
    for (std::size_t j = 0; j < kappa; ++j) out.beta(i, j) = s * svd.u(j, i);
    for (std::size_t a = 0; a < p; ++a) out.w(a, i) = s * svd.u(kappa + a, i);
    for (std::size_t sidx = 0; sidx < n; ++sidx)
      out.h(i, sidx) = s * svd.v(sidx, i);
  }
  return out;
}

inline StackedObjective lifted_objective(const SdlProblem &prob,
                                         bool horizontal) {
  const std::size_t kappa = prob.kappa;
  auto unstack = [kappa, horizontal, &prob](const StackedPoint &z) {
    LiftedState st;
    if (horizontal) {
      st.a = submatrix(z.m, 0, z.m.rows(), 0, kappa);
      st.b = submatrix(z.m, 0, z.m.rows(), kappa, z.m.cols());
    } else {
      st.a = submatrix(z.m, 0, kappa, 0, z.m.cols());
      st.b = submatrix(z.m, kappa, z.m.rows(), 0, z.m.cols());
    }
    st.gamma = z.aux.size() > 0 ? z.aux : DenseMatrix(prob.q(), kappa);
    return st;
  };
  StackedObjective f;
  f.value = [&prob, unstack](const StackedPoint &z) {
    return loss_lifted(prob, unstack(z));
  };
  f.grad = [&prob, unstack, horizontal](const StackedPoint &z) {
    const LiftedState g = grad_lifted(prob, unstack(z));
    StackedPoint out;
    out.m = horizontal ? hstack(g.a, g.b) : vstack(g.a, g.b);
    out.aux = z.aux.size() > 0 ? g.gamma : DenseMatrix(0, 0);
    return out;
  };
  return f;
}

}  // namespace detail

// Convex lifted filter solver: LPGD on the horizontal stack [A, B] followed
// by an SVD split into factors. The recovered factors reproduce the lifted
// solution: W beta = A and W H = B up to the rank projection already applied.
inline ConvResult sdl_conv_filt(const SdlProblem &prob, const LpgdConfig &cfg,
                                const LiftedState &init) {
  if (prob.mode != Mode::Filter)
    throw std::invalid_argument("sdl_conv_filt: problem mode must be Filter");
  init.check_shapes(prob);
  const StackedObjective f = detail::lifted_objective(prob, true);
  StackedPoint z0;
  z0.m = hstack(init.a, init.b);
  z0.aux = prob.q() > 0 ? init.gamma : DenseMatrix(0, 0);
  auto [zf, report] = lpgd(f, cfg, z0);
  ConvResult res;
  res.lifted.a = submatrix(zf.m, 0, zf.m.rows(), 0, prob.kappa);
  res.lifted.b = submatrix(zf.m, 0, zf.m.rows(), prob.kappa, zf.m.cols());
  res.lifted.gamma = prob.q() > 0 ? zf.aux : DenseMatrix(prob.q(), prob.kappa);
  res.factors = detail::recover_filter_factors(zf.m, cfg.rank, prob.kappa,
                                               prob.n(), res.lifted.gamma,
                                               &report.rank_deficient);
  res.report = std::move(report);
  return res;
}

// Convex lifted feature solver: LPGD on the vertical stack [A; B]; beta is
// read from the first kappa rows of U sqrt(S).
inline ConvResult sdl_conv_feat(const SdlProblem &prob, const LpgdConfig &cfg,
                                const LiftedState &init) {
  if (prob.mode != Mode::Feature)
    throw std::invalid_argument("sdl_conv_feat: problem mode must be Feature");
  init.check_shapes(prob);
  const StackedObjective f = detail::lifted_objective(prob, false);
  StackedPoint z0;
  z0.m = vstack(init.a, init.b);
  z0.aux = prob.q() > 0 ? init.gamma : DenseMatrix(0, 0);
  auto [zf, report] = lpgd(f, cfg, z0);
  ConvResult res;
  res.lifted.a = submatrix(zf.m, 0, prob.kappa, 0, zf.m.cols());
  res.lifted.b = submatrix(zf.m, prob.kappa, zf.m.rows(), 0, zf.m.cols());
  res.lifted.gamma = prob.q() > 0 ? zf.aux : DenseMatrix(prob.q(), prob.kappa);
  res.factors = detail::recover_feature_factors(zf.m, cfg.rank, prob.kappa,
                                                prob.p(), res.lifted.gamma,
                                                &report.rank_deficient);
  res.report = std::move(report);
  return res;
}

// ---------------------------------------------------------------------------
// Block coordinate descent with diminishing radius
// ---------------------------------------------------------------------------

enum class SubStep { Backtracking, Fixed };

// Snapshot emitted after each block finishes its subproblem within an outer
// iteration: objective after the move, distance from the block's value at the
// start of the iteration, and the trust radius in force.
struct BlockUpdateInfo {
  std::size_t iter = 0;
  std::size_t block = 0;
  double loss = 0.0;
  double move = 0.0;
  double radius = 0.0;
};

struct BcdConfig {
  std::size_t iters = 100;
  // Default trust radius r_k = 1 / (sqrt(k) log(k+1)): divergent sum, square
  // summable, and defined from k = 1 on.
  std::function<double(std::size_t)> radius_schedule;
  std::size_t sub_iters = 5;
  SubStep sub_step = SubStep::Backtracking;
  double fixed_step = 0.1;
  double l1_code = 0.0;  // soft-threshold weight on the code block
  double stat_tol = 0.0;
  // Optional per-block multipliers on the radius schedule (empty = all 1).
  // Blocks with very different natural scales, e.g. a unit-ball dictionary
  // against a code matrix tracking the data norm, need different radii.
  std::vector<double> block_radius_scale;
  std::function<void(const BlockUpdateInfo &)> on_block_update;

  double radius(std::size_t k) const {
    if (radius_schedule) return radius_schedule(k);
    return 1.0 / (std::sqrt(static_cast<double>(k)) *
                  std::log(static_cast<double>(k) + 1.0));
  }

  void validate() const {
    if (iters == 0) throw std::invalid_argument("BcdConfig: iters must be >= 1");
    if (sub_iters == 0)
      throw std::invalid_argument("BcdConfig: sub_iters must be >= 1");
    if (sub_step == SubStep::Fixed && !(fixed_step > 0.0))
      throw std::invalid_argument("BcdConfig: fixed_step must be positive");
    if (l1_code < 0.0)
      throw std::invalid_argument("BcdConfig: l1_code must be nonnegative");
    for (double s : block_radius_scale)
      if (!(s > 0.0))
        throw std::invalid_argument(
            "BcdConfig: block_radius_scale entries must be positive");
  }
};

// Generic block problem: full objective (including any nonsmooth penalty),
// smooth-part gradient per block, per-block constraint sets, and optional
// per-block prox operators applied after the gradient step.
struct BlockProblem {
  std::function<double(const std::vector<DenseMatrix> &)> value;
  std::function<DenseMatrix(const std::vector<DenseMatrix> &, std::size_t)>
      block_grad;
  std::vector<ConstraintSpec> constraints;
  std::vector<std::function<DenseMatrix(const DenseMatrix &, double)>> prox;
};

namespace detail {

// Projection onto (constraint set) intersect (ball of the given radius around
// center): alternating projections, a final constraint projection for exact
// set feasibility, then a segment pullback toward the feasible center so the
// radius holds exactly as well.
inline DenseMatrix project_ball_intersection(const DenseMatrix &y,
                                             const ConstraintSpec &c,
                                             const DenseMatrix &center,
                                             double radius) {
  DenseMatrix z = y;
  for (int round = 0; round < 10; ++round) {
    z = project_constraint(z, c);
    z = project_ball_around(z, center, radius);
  }
  z = project_constraint(z, c);
  DenseMatrix diff = z - center;
  const double norm = frobenius_norm(diff);
  if (norm > radius) {
    diff.scale(radius / norm);
    z = center + diff;
  }
  return z;
}

}  // namespace detail

// Diminishing-radius block coordinate descent. Each outer iteration sweeps
// the blocks in order and approximately solves each block's subproblem over
// (constraint intersect trust ball) with a few projected-gradient steps.
// Candidates are accepted only on sufficient decrease of the full objective,
// so the loss trace is non-increasing exactly and every block move respects
// the radius.
inline std::pair<std::vector<DenseMatrix>, SolverReport> bcd_dr_generic(
    const BlockProblem &f, const BcdConfig &cfg,
    std::vector<DenseMatrix> blocks) {
  cfg.validate();
  if (f.constraints.size() != blocks.size())
    throw std::invalid_argument("bcd_dr_generic: constraint count mismatch");
  if (!f.prox.empty() && f.prox.size() != blocks.size())
    throw std::invalid_argument("bcd_dr_generic: prox count mismatch");
  if (!cfg.block_radius_scale.empty() &&
      cfg.block_radius_scale.size() != blocks.size())
    throw std::invalid_argument(
        "bcd_dr_generic: block_radius_scale count mismatch");
  for (std::size_t i = 0; i < blocks.size(); ++i)
    if (!is_feasible(blocks[i], f.constraints[i]))
      throw std::invalid_argument("bcd_dr_generic: infeasible initial block " +
                                  std::to_string(i));
  const detail::WallTimer timer;
  SolverReport report;
  constexpr double armijo_c = 1e-4;
  constexpr int max_halvings = 30;

  double current = f.value(blocks);
  for (std::size_t k = 1; k <= cfg.iters; ++k) {
    const double base_radius = cfg.radius(k);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (blocks[i].size() == 0) continue;
      const double radius =
          cfg.block_radius_scale.empty()
              ? base_radius
              : base_radius * cfg.block_radius_scale[i];
      const DenseMatrix center = blocks[i];
      for (std::size_t sub = 0; sub < cfg.sub_iters; ++sub) {
        const DenseMatrix g = f.block_grad(blocks, i);
        const DenseMatrix base = blocks[i];
        double step =
            cfg.sub_step == SubStep::Backtracking ? 1.0 : cfg.fixed_step;
        bool accepted = false;
        const int tries =
            cfg.sub_step == SubStep::Backtracking ? max_halvings : 1;
        for (int attempt = 0; attempt < tries; ++attempt) {
          DenseMatrix cand = base;
          cand.add_scaled(g, -step);
          if (!f.prox.empty() && f.prox[i]) cand = f.prox[i](cand, step);
          cand = detail::project_ball_intersection(cand, f.constraints[i],
                                                   center, radius);
          const double move = frobenius_norm(cand - base);
          blocks[i] = cand;
          const double trial = f.value(blocks);
          const bool enough =
              cfg.sub_step == SubStep::Backtracking
                  ? trial <= current - (armijo_c / step) * move * move
                  : trial <= current;
          if (std::isfinite(trial) && enough) {
            current = trial;
            accepted = true;
            break;
          }
          blocks[i] = base;
          step *= 0.5;
        }
        if (!accepted) break;  // no descent available at this radius
      }
      if (cfg.on_block_update)
        cfg.on_block_update(
            {k, i, current, frobenius_norm(blocks[i] - center), radius});
    }
    std::vector<DenseMatrix> grads(blocks.size());
    double gm_acc = 0.0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      grads[i] = blocks[i].size() > 0 ? f.block_grad(blocks, i)
                                      : DenseMatrix(blocks[i].rows(),
                                                    blocks[i].cols());
      if (blocks[i].size() == 0) continue;
      const double gm = frobenius_norm(
          gradient_mapping(grads[i], blocks[i], 1.0, f.constraints[i]));
      gm_acc += gm * gm;
    }
    const double stat = epsilon_stationarity(grads, blocks, f.constraints);
    report.records.push_back(
        {k, current, stat, std::sqrt(gm_acc), timer.seconds()});
    if (cfg.stat_tol > 0.0 && stat <= cfg.stat_tol) {
      report.termination = "converged";
      return {blocks, report};
    }
  }
  report.termination = "max_iters";
  return {blocks, report};
}

namespace detail {

inline DenseMatrix soft_threshold(const DenseMatrix &m, double t) {
  DenseMatrix out = m;
  for (std::size_t k = 0; k < out.size(); ++k) {
    double &v = out.data()[k];
    if (v > t)
      v -= t;
    else if (v < -t)
      v += t;
    else
      v = 0.0;
  }
  return out;
}

inline double l1_norm(const DenseMatrix &m) {
  double acc = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) acc += std::fabs(m.data()[k]);
  return acc;
}

}  // namespace detail

// BCD-DR specialized to the separate SDL loss with blocks updated in the
// order W, beta, Gamma, H. The optional L1 penalty applies to H via
// soft-thresholding inside its projected-gradient step.
inline std::pair<FactorState, SolverReport> bcd_dr(const SdlProblem &prob,
                                                   const BcdConfig &cfg,
                                                   const FactorState &init) {
  prob.validate();
  init.check_shapes(prob);
  auto to_state = [](const std::vector<DenseMatrix> &blocks) {
    FactorState st;
    st.w = blocks[0];
    st.beta = blocks[1];
    st.gamma = blocks[2];
    st.h = blocks[3];
    return st;
  };
  BlockProblem f;
  f.value = [&prob, &cfg, to_state](const std::vector<DenseMatrix> &blocks) {
    double v = loss_separate(prob, to_state(blocks));
    if (cfg.l1_code > 0.0) v += cfg.l1_code * detail::l1_norm(blocks[3]);
    return v;
  };
  f.block_grad = [&prob, to_state](const std::vector<DenseMatrix> &blocks,
                                   std::size_t i) {
    const FactorState g = grad_blocks(prob, to_state(blocks));
    switch (i) {
      case 0: return g.w;
      case 1: return g.beta;
      case 2: return g.gamma;
      default: return g.h;
    }
  };
  f.constraints = {prob.constraints.dict, prob.constraints.beta,
                   prob.constraints.aux, prob.constraints.code};
  if (cfg.l1_code > 0.0) {
    f.prox.resize(4);
    f.prox[3] = [&cfg](const DenseMatrix &m, double step) {
      return detail::soft_threshold(m, step * cfg.l1_code);
    };
  }
  std::vector<DenseMatrix> blocks = {init.w, init.beta, init.gamma, init.h};
  auto [final_blocks, report] = bcd_dr_generic(f, cfg, std::move(blocks));
  return {to_state(final_blocks), std::move(report)};
}

// ---------------------------------------------------------------------------
// Conditioning diagnostics
// ---------------------------------------------------------------------------

struct ConditioningReport {
  double delta_minus = 0.0;
  double delta_plus = 0.0;
  double lambda_max_aux = 0.0;
  double alpha_minus = 0.0;
  double alpha_plus = 0.0;
  double gamma_max = 0.0;
  double mu_star = 0.0;
  double l_star = 0.0;
  double mu = 0.0;
  double l = 0.0;
  double ratio = 0.0;
  bool condition_ok = false;
  double tau_lo = 0.0;  // admissible stepsize interval (tau_lo, tau_hi),
  double tau_hi = 0.0;  // nonempty exactly when ratio < 3
  // Feature-mode regularization band (no-aux reduction), reported as a
  // diagnostic only; condition_ok always comes from the ratio.
  double feature_nu_lo = 0.0;
  double feature_nu_hi = 0.0;
  bool feature_nu_in_band = false;

  double rho(double tau) const {
    return 2.0 * std::max(std::fabs(1.0 - tau * mu), std::fabs(1.0 - tau * l));
  }
  double tau_mid() const { return 0.5 * (tau_lo + tau_hi); }
};

// Combine data-side eigenvalue bounds with classifier curvature bounds into
// the convexity/smoothness constants, the conditioning ratio, and the
// admissible stepsize interval.
inline ConditioningReport conditioning_from_bounds(
    Mode mode, double xi, double nu, std::size_t n, double delta_minus,
    double delta_plus, const ClassBounds &cb, double lambda_max_aux) {
  ConditioningReport rep;
  rep.delta_minus = delta_minus;
  rep.delta_plus = delta_plus;
  rep.lambda_max_aux = lambda_max_aux;
  rep.alpha_minus = cb.alpha_minus;
  rep.alpha_plus = cb.alpha_plus;
  rep.gamma_max = cb.gamma_max;
  rep.mu_star = delta_minus * cb.alpha_minus;
  rep.l_star = delta_plus * cb.alpha_plus;
  const double nd = static_cast<double>(n);
  if (mode == Mode::Filter) {
    rep.mu = std::min(2.0 * xi, 2.0 * nu + nd * rep.mu_star);
    rep.l = std::max(2.0 * xi, 2.0 * nu + nd * rep.l_star);
  } else {
    rep.mu = std::min(2.0 * xi, 2.0 * nu + rep.alpha_minus);
    rep.l = std::max({2.0 * xi,
                      2.0 * nu + rep.alpha_plus * lambda_max_aux * nd,
                      rep.alpha_plus + 2.0 * nu});
  }
  rep.ratio = rep.mu > 0.0 ? rep.l / rep.mu
                           : std::numeric_limits<double>::infinity();
  rep.condition_ok = rep.ratio < 3.0;
  if (rep.mu > 0.0 && rep.l > 0.0) {
    rep.tau_lo = 1.0 / (2.0 * rep.mu);
    rep.tau_hi = 3.0 / (2.0 * rep.l);
  }
  rep.feature_nu_lo =
      std::max(0.25 * rep.alpha_plus,
               0.25 * (rep.alpha_plus - 6.0 * xi * rep.alpha_minus));
  rep.feature_nu_hi = xi / 3.0;
  rep.feature_nu_in_band = rep.feature_nu_lo < nu && nu < rep.feature_nu_hi;
  return rep;
}

// Curvature diagnostics for the lifted losses: extreme eigenvalues of the
// stacked second moment combine with the classifier bounds at the given
// activation radius.
inline ConditioningReport conditioning(const SdlProblem &prob, double m_bound) {
  prob.validate();
  if (!(m_bound > 0.0))
    throw std::invalid_argument("conditioning: activation bound must be positive");
  const std::size_t n = prob.n();
  const DenseMatrix phi =
      prob.q() > 0 ? vstack(prob.x_data, prob.x_aux) : prob.x_data;
  DenseMatrix second = matmul(phi, phi, false, true);
  second.scale(1.0 / static_cast<double>(n));
  const std::vector<double> eigs = symmetric_eigenvalues(second);
  double lambda_max_aux = 0.0;
  if (prob.q() > 0) {
    DenseMatrix aux_second = matmul(prob.x_aux, prob.x_aux, false, true);
    aux_second.scale(1.0 / static_cast<double>(n));
    lambda_max_aux = std::max(symmetric_eigenvalues(aux_second).back(), 0.0);
  }
  return conditioning_from_bounds(prob.mode, prob.xi, prob.nu, n,
                                  std::max(eigs.front(), 0.0),
                                  std::max(eigs.back(), 0.0),
                                  logit_bounds(m_bound, prob.kappa),
                                  lambda_max_aux);
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

struct Prediction {
  int label = 0;
  std::vector<double> probs;
};

namespace detail {

// Unsupervised coding for feature-mode prediction: projected gradient on
// 0.5 ||x - W h||^2 over the code constraint, stepsize 1/lambda_max(W^T W).
inline DenseMatrix code_sample(const DenseMatrix &w,
                               const std::vector<double> &x,
                               const ConstraintSpec &code_constraint) {
  const std::size_t p = w.rows();
  const std::size_t r = w.cols();
  DenseMatrix h = project_constraint(DenseMatrix(r, 1), code_constraint);
  const DenseMatrix gram = matmul(w, w, true);
  const double lam = symmetric_eigenvalues(gram).back();
  if (!(lam > 0.0)) return h;
  const double step = 1.0 / lam;
  DenseMatrix xm(p, 1);
  for (std::size_t a = 0; a < p; ++a) xm(a, 0) = x[a];
  for (int it = 0; it < 200; ++it) {
    const DenseMatrix residual = matmul(w, h) - xm;
    const DenseMatrix grad = matmul(w, residual, true);
    h.add_scaled(grad, -step);
    h = project_constraint(h, code_constraint);
  }
  return h;
}

}  // namespace detail

// Class probabilities and argmax label for one sample. Filter mode reads the
// activation straight from the dictionary filters; feature mode first codes
// the sample over the dictionary. Ties break toward the smallest label.
inline Prediction predict(const SdlProblem &prob, const FactorState &state,
                          const std::vector<double> &x,
                          const std::vector<double> &x_aux) {
  state.check_shapes(prob);
  if (x.size() != prob.p())
    throw std::invalid_argument("predict: sample length mismatch");
  if (x_aux.size() != prob.q())
    throw std::invalid_argument("predict: aux length mismatch");
  const std::size_t r = prob.rank;
  DenseMatrix hcol(r, 1);
  if (prob.mode == Mode::Filter) {
    for (std::size_t i = 0; i < r; ++i) {
      double acc = 0.0;
      for (std::size_t a = 0; a < prob.p(); ++a) acc += state.w(a, i) * x[a];
      hcol(i, 0) = acc;
    }
  } else {
    hcol = detail::code_sample(state.w, x, prob.constraints.code);
  }
  std::vector<double> act(prob.kappa, 0.0);
  for (std::size_t j = 0; j < prob.kappa; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < r; ++i) acc += state.beta(i, j) * hcol(i, 0);
    for (std::size_t c = 0; c < prob.q(); ++c)
      acc += state.gamma(c, j) * x_aux[c];
    act[j] = acc;
  }
  Prediction pred;
  pred.probs = predictive_distribution(act, prob.h);
  pred.label = 0;
  for (std::size_t j = 1; j < pred.probs.size(); ++j)
    if (pred.probs[j] > pred.probs[pred.label]) pred.label = static_cast<int>(j);
  return pred;
}

// ---------------------------------------------------------------------------
// Seeded initialization
// ---------------------------------------------------------------------------

namespace detail {

inline double init_scale(const ConstraintSpec &c) {
  const bool bounded = c.kind == ConstraintKind::FrobeniusBall ||
                       c.kind == ConstraintKind::NonnegFrobeniusBall;
  return 0.1 * (bounded ? c.radius : 1.0);
}

}  // namespace detail

// Uniform [0,1) entries scaled to a tenth of the constraint radius, then
// projected for strict feasibility.
inline FactorState random_factor_init(const SdlProblem &prob, Rng *rng) {
  FactorState st = FactorState::zeros(prob);
  st.w = project_constraint(
      rng->uniform_matrix(prob.p(), prob.rank, 0.0,
                          detail::init_scale(prob.constraints.dict)),
      prob.constraints.dict);
  st.beta = project_constraint(
      rng->uniform_matrix(prob.rank, prob.kappa, 0.0,
                          detail::init_scale(prob.constraints.beta)),
      prob.constraints.beta);
  st.gamma = project_constraint(
      rng->uniform_matrix(prob.q(), prob.kappa, 0.0,
                          detail::init_scale(prob.constraints.aux)),
      prob.constraints.aux);
  st.h = project_constraint(
      rng->uniform_matrix(prob.rank, prob.n(), 0.0,
                          detail::init_scale(prob.constraints.code)),
      prob.constraints.code);
  return st;
}

inline LiftedState random_lifted_init(const SdlProblem &prob, Rng *rng) {
  LiftedState st = LiftedState::zeros(prob);
  const double scale = detail::init_scale(prob.lifted_constraint);
  if (prob.mode == Mode::Filter)
    st.a = rng->uniform_matrix(prob.p(), prob.kappa, 0.0, scale);
  else
    st.a = rng->uniform_matrix(prob.kappa, prob.n(), 0.0, scale);
  st.b = rng->uniform_matrix(prob.p(), prob.n(), 0.0, scale);
  st.gamma = rng->uniform_matrix(prob.q(), prob.kappa, 0.0, scale);
  return st;
}

}  // namespace sdl
