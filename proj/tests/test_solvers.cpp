// tests/test_solvers.cpp
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "sdl/generative.hpp"
#include "sdl/loss.hpp"
#include "sdl/problem.hpp"
#include "sdl/rng.hpp"
#include "sdl/solvers.hpp"
#include "sdl/svd.hpp"

using sdl::ConstraintSpec;
using sdl::DenseMatrix;
using sdl::FactorState;
using sdl::LiftedState;
using sdl::Mode;
using sdl::SdlProblem;
using sdl::StackedObjective;
using sdl::StackedPoint;

namespace {

// Quadratic with a possibly rank-deficient target: f(Z) = ||Z - T||_F^2.
StackedObjective quadratic_to(const DenseMatrix &target) {
  StackedObjective f;
  f.value = [target](const StackedPoint &z) {
    const double d = sdl::frobenius_norm(z.m - target);
    return d * d;
  };
  f.grad = [target](const StackedPoint &z) {
    StackedPoint g;
    g.m = 2.0 * (z.m - target);
    g.aux = DenseMatrix(0, 0);
    return g;
  };
  return f;
}

SdlProblem small_problem(Mode mode, std::size_t p, std::size_t n,
                         std::size_t r, std::size_t q, std::size_t kappa,
                         double xi, double nu, std::uint64_t seed) {
  sdl::Rng rng(seed);
  SdlProblem prob;
  prob.x_data = rng.gaussian_matrix(p, n);
  prob.x_aux = rng.gaussian_matrix(q, n);
  prob.labels.resize(n);
  for (std::size_t s = 0; s < n; ++s)
    prob.labels[s] = static_cast<int>(rng.uniform() * (kappa + 1));
  prob.kappa = kappa;
  prob.rank = r;
  prob.xi = xi;
  prob.nu = nu;
  prob.mode = mode;
  prob.validate();
  return prob;
}

}  // namespace

TEST_CASE("one projected gradient step is exact on a quadratic") {
  DenseMatrix target(2, 2);
  target(0, 0) = 1.0;
  const StackedObjective f = quadratic_to(target);
  sdl::LpgdConfig cfg;
  cfg.tau = 0.25;
  cfg.iters = 1;
  cfg.rank = 2;
  cfg.theta = ConstraintSpec::frobenius_ball(0.5);
  StackedPoint z0{DenseMatrix(2, 2), DenseMatrix(0, 0)};
  const auto [z1, report] = sdl::lpgd(f, cfg, z0);
  // z0 - tau * grad = 0.5 T, inside the ball, full rank requested.
  REQUIRE(z1.m(0, 0) == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(z1.m(0, 1) == 0.0);
  REQUIRE(report.records.size() == 1);
  REQUIRE(report.records[0].loss == Catch::Approx(0.25).margin(1e-14));
  REQUIRE(report.records[0].grad_mapping_norm ==
          Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("iterates contract at the predicted rate on a quadratic") {
  // Coordinatewise curvatures in [mu, L] = [1, 2]; within the admissible
  // stepsize window the distance to the optimum shrinks at least by
  // rho(tau)/2 per step, so the reported rho(tau) upper-bounds the decay.
  sdl::Rng rng(7);
  const std::size_t d = 6;
  DenseMatrix target = rng.gaussian_matrix(d, 1);
  std::vector<double> curv(d);
  for (std::size_t i = 0; i < d; ++i) curv[i] = 0.5 + 0.5 * rng.uniform();

  StackedObjective f;
  f.value = [&](const StackedPoint &z) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double e = z.m(i, 0) - target(i, 0);
      acc += curv[i] * e * e;
    }
    return acc;
  };
  f.grad = [&](const StackedPoint &z) {
    StackedPoint g;
    g.m = DenseMatrix(d, 1);
    for (std::size_t i = 0; i < d; ++i)
      g.m(i, 0) = 2.0 * curv[i] * (z.m(i, 0) - target(i, 0));
    g.aux = DenseMatrix(0, 0);
    return g;
  };

  const double mu = 1.0, l = 2.0, tau = 0.625;
  const double rho = 2.0 * std::max(std::fabs(1.0 - tau * mu),
                                    std::fabs(1.0 - tau * l));
  sdl::LpgdConfig cfg;
  cfg.tau = tau;
  cfg.iters = 1;
  cfg.rank = 1;

  StackedPoint z{DenseMatrix(d, 1), DenseMatrix(0, 0)};
  const double d0 = sdl::frobenius_norm(z.m - target);
  double bound = d0;
  for (int t = 1; t <= 20; ++t) {
    z = sdl::lpgd(f, cfg, z).first;
    bound *= rho;
    REQUIRE(sdl::frobenius_norm(z.m - target) <= bound + 1e-12);
  }
}

TEST_CASE("rank projection pins the fixed point of the quadratic") {
  sdl::Rng rng(13);
  const DenseMatrix target = rng.gaussian_matrix(4, 5);
  const StackedObjective f = quadratic_to(target);
  sdl::LpgdConfig cfg;
  cfg.tau = 0.5;
  cfg.iters = 8;
  cfg.rank = 2;
  StackedPoint z0{DenseMatrix(4, 5), DenseMatrix(0, 0)};
  const auto [zf, report] = sdl::lpgd(f, cfg, z0);
  const DenseMatrix truncated = sdl::rank_r_project(target, 2);
  REQUIRE(sdl::frobenius_norm(zf.m - truncated) < 1e-9);
  // The best rank-2 approximation is also the direct least-squares answer.
  const sdl::SvdResult svd = sdl::svd_full(target);
  double tail = 0.0;
  for (std::size_t i = 2; i < svd.sigma.size(); ++i)
    tail += svd.sigma[i] * svd.sigma[i];
  REQUIRE(report.final_loss() == Catch::Approx(tail).margin(1e-9));
}

TEST_CASE("non-finite objective values are reported as numeric errors") {
  StackedObjective f;
  f.value = [](const StackedPoint &) {
    return std::numeric_limits<double>::quiet_NaN();
  };
  f.grad = [](const StackedPoint &z) {
    return StackedPoint{DenseMatrix(z.m.rows(), z.m.cols()), DenseMatrix(0, 0)};
  };
  sdl::LpgdConfig cfg;
  cfg.rank = 1;
  StackedPoint z0{DenseMatrix(2, 2), DenseMatrix(0, 0)};
  REQUIRE_THROWS_AS(sdl::lpgd(f, cfg, z0), std::runtime_error);
}

TEST_CASE("lpgd converges to stationarity when the rank bound is slack") {
  // Feature mode: its quadratic regularizer is smooth everywhere, so a
  // fixed-step method can reach a tight stationarity tolerance. The Filter
  // regularizer (squared norm sum) has a kink at zero activation weights
  // and constant-step descent oscillates there instead of settling.
  const SdlProblem prob =
      small_problem(Mode::Feature, 3, 6, 3, 1, 1, 0.5, 0.1, 19);
  sdl::Rng rng(20);
  LiftedState init = LiftedState::zeros(prob);
  init.a = rng.gaussian_matrix(1, 6, 0.2);
  init.b = rng.gaussian_matrix(3, 6, 0.2);
  init.gamma = rng.gaussian_matrix(1, 1, 0.2);
  sdl::LpgdConfig cfg;
  cfg.tau = 0.05;
  cfg.iters = 20000;
  cfg.rank = 4;  // stack is 4 x 6, so rank 4 never truncates
  cfg.stat_tol = 1e-10;
  const sdl::ConvResult res = sdl::sdl_conv_feat(prob, cfg, init);
  REQUIRE(res.report.termination == "converged");
  REQUIRE(res.report.records.back().stationarity <= 1e-10);
}

TEST_CASE("factor recovery reproduces the lifted solution") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SdlProblem fprob =
        small_problem(Mode::Filter, 5, 8, 2, 2, 2, 0.6, 0.05, 100 + seed);
    sdl::Rng rng(200 + seed);
    const LiftedState finit = sdl::random_lifted_init(fprob, &rng);
    sdl::LpgdConfig cfg;
    cfg.tau = 0.02;
    cfg.iters = 30;
    cfg.rank = 2;
    const sdl::ConvResult fres = sdl::sdl_conv_filt(fprob, cfg, finit);
    const double fscale =
        std::max(1.0, sdl::frobenius_norm(fres.lifted.b));
    REQUIRE(sdl::frobenius_norm(
                sdl::matmul(fres.factors.w, fres.factors.beta) -
                fres.lifted.a) < 1e-8 * fscale);
    REQUIRE(sdl::frobenius_norm(sdl::matmul(fres.factors.w, fres.factors.h) -
                                fres.lifted.b) < 1e-8 * fscale);
    REQUIRE(sdl::max_abs(fres.factors.gamma - fres.lifted.gamma) == 0.0);

    const SdlProblem gprob =
        small_problem(Mode::Feature, 5, 8, 2, 2, 2, 0.6, 0.05, 300 + seed);
    sdl::Rng rng2(400 + seed);
    const LiftedState ginit = sdl::random_lifted_init(gprob, &rng2);
    const sdl::ConvResult gres = sdl::sdl_conv_feat(gprob, cfg, ginit);
    const double gscale =
        std::max(1.0, sdl::frobenius_norm(gres.lifted.b));
    REQUIRE(sdl::frobenius_norm(
                sdl::matmul(gres.factors.beta, gres.factors.h, true) -
                gres.lifted.a) < 1e-8 * gscale);
    REQUIRE(sdl::frobenius_norm(sdl::matmul(gres.factors.w, gres.factors.h) -
                                gres.lifted.b) < 1e-8 * gscale);
  }
}

TEST_CASE("factor recovery flags rank deficiency") {
  sdl::Rng rng(31);
  const DenseMatrix u = rng.gaussian_matrix(4, 1);
  const DenseMatrix v = rng.gaussian_matrix(1, 6);
  const DenseMatrix stacked = sdl::matmul(u, v);  // rank one, 4 x 6
  bool flag = false;
  const FactorState out =
      sdl::detail::recover_filter_factors(stacked, 3, 2, 4, DenseMatrix(0, 2),
                                          &flag);
  REQUIRE(flag);
  // Only the leading factor column is populated.
  for (std::size_t a = 0; a < 4; ++a) {
    REQUIRE(out.w(a, 1) == 0.0);
    REQUIRE(out.w(a, 2) == 0.0);
  }
  REQUIRE(sdl::frobenius_norm(sdl::matmul(out.w, out.h) -
                              sdl::submatrix(stacked, 0, 4, 2, 6)) < 1e-10);
}

TEST_CASE("solver mode guards") {
  const SdlProblem fprob = small_problem(Mode::Filter, 3, 4, 1, 0, 1, 1.0, 0.0, 41);
  const SdlProblem gprob = small_problem(Mode::Feature, 3, 4, 1, 0, 1, 1.0, 0.0, 42);
  sdl::LpgdConfig cfg;
  REQUIRE_THROWS_AS(sdl::sdl_conv_filt(gprob, cfg, LiftedState::zeros(gprob)),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(sdl::sdl_conv_feat(fprob, cfg, LiftedState::zeros(fprob)),
                    std::invalid_argument);
  sdl::LpgdConfig bad;
  bad.tau = 0.0;
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("gradient mapping norm never exceeds the gradient norm") {
  sdl::Rng rng(47);
  const std::vector<ConstraintSpec> cases = {
      ConstraintSpec::unbounded(), ConstraintSpec::frobenius_ball(1.0),
      ConstraintSpec::nonneg_orthant(),
      ConstraintSpec::nonneg_frobenius_ball(1.0), ConstraintSpec::box(0.0, 1.0)};
  for (int rep = 0; rep < 100; ++rep) {
    const ConstraintSpec &c = cases[rep % cases.size()];
    const DenseMatrix point =
        sdl::project_constraint(rng.gaussian_matrix(3, 2), c);
    const DenseMatrix grad = rng.gaussian_matrix(3, 2);
    const double tau = 0.05 + rng.uniform();
    const DenseMatrix g = sdl::gradient_mapping(grad, point, tau, c);
    REQUIRE(sdl::frobenius_norm(g) <=
            sdl::frobenius_norm(grad) + 1e-12);
  }
  // Unconstrained, the mapping is the gradient itself.
  const DenseMatrix grad = rng.gaussian_matrix(2, 2);
  const DenseMatrix point = rng.gaussian_matrix(2, 2);
  const DenseMatrix g =
      sdl::gradient_mapping(grad, point, 0.3, ConstraintSpec::unbounded());
  REQUIRE(sdl::max_abs(g - grad) < 1e-12);
  REQUIRE_THROWS_AS(
      sdl::gradient_mapping(grad, point, 0.0, ConstraintSpec::unbounded()),
      std::invalid_argument);
}

TEST_CASE("stationarity for block products combines in quadrature") {
  sdl::Rng rng(53);
  const DenseMatrix g1 = rng.gaussian_matrix(2, 2);
  const DenseMatrix g2 = rng.gaussian_matrix(3, 1);
  const DenseMatrix x1 = rng.gaussian_matrix(2, 2);
  const DenseMatrix x2 = rng.gaussian_matrix(3, 1);
  const ConstraintSpec c1 = ConstraintSpec::unbounded();
  const ConstraintSpec c2 = ConstraintSpec::unbounded();
  const double s1 = sdl::epsilon_stationarity(g1, x1, c1);
  const double s2 = sdl::epsilon_stationarity(g2, x2, c2);
  const double both = sdl::epsilon_stationarity({g1, g2}, {x1, x2}, {c1, c2});
  REQUIRE(both == Catch::Approx(std::sqrt(s1 * s1 + s2 * s2)).epsilon(1e-12));
  REQUIRE_THROWS_AS(sdl::epsilon_stationarity({g1}, {x1, x2}, {c1, c2}),
                    std::invalid_argument);
}

TEST_CASE("conditioning constants on a worked instance") {
  sdl::ClassBounds cb{};
  cb.alpha_minus = 1.0;
  cb.alpha_plus = 2.0;
  cb.gamma_max = 1.5;
  cb.m_bound = 1.0;
  const sdl::ConditioningReport rep = sdl::conditioning_from_bounds(
      Mode::Filter, 1.0, 0.0, 1, 1.0, 1.0, cb, 0.0);
  REQUIRE(rep.mu_star == 1.0);
  REQUIRE(rep.l_star == 2.0);
  REQUIRE(rep.mu == 1.0);
  REQUIRE(rep.l == 2.0);
  REQUIRE(rep.ratio == 2.0);
  REQUIRE(rep.condition_ok);
  REQUIRE(rep.tau_lo == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(rep.tau_hi == Catch::Approx(0.75).margin(1e-15));
  REQUIRE(rep.rho(rep.tau_mid()) == Catch::Approx(0.75).margin(1e-12));
}

TEST_CASE("conditioning report from data") {
  const SdlProblem prob = small_problem(Mode::Filter, 2, 5, 1, 1, 2, 1.0, 0.1, 61);
  const sdl::ConditioningReport rep = sdl::conditioning(prob, 1.0);
  REQUIRE(rep.delta_minus >= 0.0);
  REQUIRE(rep.delta_plus >= rep.delta_minus);
  // Direct recomputation of the extreme eigenvalues of the second moment.
  const DenseMatrix phi = sdl::vstack(prob.x_data, prob.x_aux);
  DenseMatrix second = sdl::matmul(phi, phi, false, true);
  second.scale(1.0 / 5.0);
  const std::vector<double> eigs = sdl::symmetric_eigenvalues(second);
  REQUIRE(rep.delta_minus == Catch::Approx(std::max(eigs.front(), 0.0)).margin(1e-12));
  REQUIRE(rep.delta_plus == Catch::Approx(eigs.back()).margin(1e-12));
  const sdl::ClassBounds cb = sdl::logit_bounds(1.0, 2);
  REQUIRE(rep.alpha_minus == cb.alpha_minus);
  REQUIRE(rep.alpha_plus == cb.alpha_plus);
  REQUIRE_THROWS_AS(sdl::conditioning(prob, 0.0), std::invalid_argument);
}

TEST_CASE("badly conditioned instances yield an empty stepsize interval") {
  const SdlProblem prob =
      small_problem(Mode::Filter, 2, 5, 1, 0, 1, 100.0, 0.0, 67);
  const sdl::ConditioningReport rep = sdl::conditioning(prob, 1.0);
  REQUIRE(rep.ratio >= 3.0);
  REQUIRE_FALSE(rep.condition_ok);
  REQUIRE(rep.tau_lo >= rep.tau_hi);
}

TEST_CASE("feature mode regularization band is reported verbatim") {
  for (double nu : {0.0, 0.2, 2.0}) {
    const SdlProblem prob =
        small_problem(Mode::Feature, 3, 6, 2, 0, 1, 1.0, nu, 71);
    const sdl::ConditioningReport rep = sdl::conditioning(prob, 1.0);
    const double lo = std::max(
        0.25 * rep.alpha_plus,
        0.25 * (rep.alpha_plus - 6.0 * prob.xi * rep.alpha_minus));
    REQUIRE(rep.feature_nu_lo == Catch::Approx(lo).margin(1e-15));
    REQUIRE(rep.feature_nu_hi == Catch::Approx(prob.xi / 3.0).margin(1e-15));
    REQUIRE(rep.feature_nu_in_band == (lo < nu && nu < prob.xi / 3.0));
  }
}

TEST_CASE("prediction with zero parameters is uniform with label zero") {
  const SdlProblem prob = small_problem(Mode::Filter, 3, 4, 2, 1, 2, 1.0, 0.0, 73);
  const FactorState zeros = FactorState::zeros(prob);
  const sdl::Prediction pred =
      sdl::predict(prob, zeros, {1.0, -0.5, 2.0}, {0.3});
  REQUIRE(pred.label == 0);
  for (double g : pred.probs)
    REQUIRE(g == Catch::Approx(1.0 / 3.0).margin(1e-14));
  REQUIRE_THROWS_AS(sdl::predict(prob, zeros, {1.0}, {0.3}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(sdl::predict(prob, zeros, {1.0, 0.0, 0.0}, {}),
                    std::invalid_argument);
}

TEST_CASE("prediction separates a planted filter direction") {
  SdlProblem prob = small_problem(Mode::Filter, 2, 4, 1, 0, 1, 1.0, 0.0, 79);
  FactorState st = FactorState::zeros(prob);
  st.w(0, 0) = 1.0;
  st.beta(0, 0) = 5.0;
  REQUIRE(sdl::predict(prob, st, {1.0, 0.0}, {}).label == 1);
  REQUIRE(sdl::predict(prob, st, {-1.0, 0.0}, {}).label == 0);
}

TEST_CASE("feature prediction with an orthonormal dictionary codes exactly") {
  SdlProblem prob = small_problem(Mode::Feature, 3, 5, 2, 1, 2, 1.0, 0.0, 83);
  sdl::Rng rng(84);
  FactorState st = FactorState::zeros(prob);
  st.w(0, 0) = 1.0;
  st.w(1, 1) = 1.0;  // orthonormal columns
  st.beta = rng.gaussian_matrix(2, 2);
  st.gamma = rng.gaussian_matrix(1, 2);
  const std::vector<double> x = {0.7, -1.2, 0.4};
  const std::vector<double> xa = {0.9};
  const sdl::Prediction pred = sdl::predict(prob, st, x, xa);
  // The code equals W^T x, so the activation is directly computable.
  std::vector<double> act(2, 0.0);
  for (std::size_t j = 0; j < 2; ++j) {
    act[j] = st.beta(0, j) * x[0] + st.beta(1, j) * x[1] +
             st.gamma(0, j) * xa[0];
  }
  const std::vector<double> expected =
      sdl::predictive_distribution(act, prob.h);
  for (std::size_t j = 0; j < expected.size(); ++j)
    REQUIRE(pred.probs[j] == Catch::Approx(expected[j]).margin(1e-6));
}

TEST_CASE("block descent decreases the loss monotonically and stays feasible") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SdlProblem prob =
        small_problem(Mode::Filter, 4, 6, 2, 1, 1, 0.8, 0.1, 500 + seed);
    prob.constraints.dict = ConstraintSpec::nonneg_frobenius_ball(1.0);
    prob.constraints.code = ConstraintSpec::nonneg_orthant();
    prob.constraints.beta = ConstraintSpec::frobenius_ball(1.0);
    sdl::Rng rng(600 + seed);
    const FactorState init = sdl::random_factor_init(prob, &rng);

    std::vector<sdl::BlockUpdateInfo> trace;
    sdl::BcdConfig cfg;
    cfg.iters = 12;
    cfg.sub_iters = 3;
    cfg.on_block_update = [&trace](const sdl::BlockUpdateInfo &info) {
      trace.push_back(info);
    };
    const auto [fin, report] = sdl::bcd_dr(prob, cfg, init);

    const double initial = sdl::loss_separate(prob, init);
    double prev = initial;
    for (const sdl::BlockUpdateInfo &info : trace) {
      REQUIRE(info.loss <= prev + 1e-12);
      REQUIRE(info.move <= info.radius + 1e-12);
      REQUIRE(info.radius == Catch::Approx(cfg.radius(info.iter)).margin(0.0));
      prev = info.loss;
    }
    REQUIRE(report.records.size() == 12);
    for (std::size_t k = 1; k < report.records.size(); ++k)
      REQUIRE(report.records[k].loss <= report.records[k - 1].loss + 1e-12);
    REQUIRE(report.final_loss() <= initial);

    REQUIRE(sdl::is_feasible(fin.w, prob.constraints.dict));
    REQUIRE(sdl::is_feasible(fin.h, prob.constraints.code));
    REQUIRE(sdl::is_feasible(fin.beta, prob.constraints.beta));
  }
}

TEST_CASE("fixed substeps accept only descent") {
  SdlProblem prob = small_problem(Mode::Feature, 4, 6, 2, 0, 1, 0.8, 0.0, 91);
  sdl::Rng rng(92);
  const FactorState init = sdl::random_factor_init(prob, &rng);
  sdl::BcdConfig cfg;
  cfg.iters = 10;
  cfg.sub_step = sdl::SubStep::Fixed;
  cfg.fixed_step = 0.05;
  const auto [fin, report] = sdl::bcd_dr(prob, cfg, init);
  double prev = sdl::loss_separate(prob, init);
  for (const sdl::IterationRecord &rec : report.records) {
    REQUIRE(rec.loss <= prev + 1e-12);
    prev = rec.loss;
  }
}

TEST_CASE("soft thresholding produces exact zeros in the code block") {
  SdlProblem prob = small_problem(Mode::Filter, 4, 8, 2, 0, 1, 0.4, 0.0, 95);
  sdl::Rng rng(96);
  const FactorState init = sdl::random_factor_init(prob, &rng);
  sdl::BcdConfig cfg;
  cfg.iters = 20;
  cfg.l1_code = 1.5;
  const auto [fin, report] = sdl::bcd_dr(prob, cfg, init);
  std::size_t zeros = 0;
  for (std::size_t k = 0; k < fin.h.size(); ++k)
    if (fin.h.data()[k] == 0.0) ++zeros;
  REQUIRE(zeros > 0);
}

TEST_CASE("block descent configuration and input guards") {
  sdl::BcdConfig cfg;
  cfg.iters = 0;
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.iters = 5;
  cfg.sub_iters = 0;
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.sub_iters = 2;
  cfg.l1_code = -1.0;
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.l1_code = 0.0;
  cfg.sub_step = sdl::SubStep::Fixed;
  cfg.fixed_step = 0.0;
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);

  SdlProblem prob = small_problem(Mode::Filter, 3, 4, 1, 0, 1, 1.0, 0.0, 97);
  prob.constraints.code = ConstraintSpec::nonneg_orthant();
  FactorState init = FactorState::zeros(prob);
  init.h.fill(-1.0);
  sdl::BcdConfig ok;
  REQUIRE_THROWS_AS(sdl::bcd_dr(prob, ok, init), std::invalid_argument);
}

TEST_CASE("default trust radius schedule") {
  const sdl::BcdConfig cfg;
  REQUIRE(cfg.radius(1) == Catch::Approx(1.0 / std::log(2.0)).margin(1e-14));
  REQUIRE(cfg.radius(4) ==
          Catch::Approx(1.0 / (2.0 * std::log(5.0))).margin(1e-14));
  sdl::BcdConfig custom;
  custom.radius_schedule = [](std::size_t) { return 0.25; };
  REQUIRE(custom.radius(10) == 0.25);
}

TEST_CASE("per-block radius scales multiply the schedule") {
  SdlProblem prob = small_problem(Mode::Filter, 4, 6, 2, 1, 1, 0.8, 0.0, 93);
  prob.constraints.dict = ConstraintSpec::nonneg_frobenius_ball(1.0);
  prob.constraints.code = ConstraintSpec::nonneg_orthant();
  sdl::Rng rng(94);
  const FactorState init = sdl::random_factor_init(prob, &rng);

  std::vector<sdl::BlockUpdateInfo> trace;
  sdl::BcdConfig cfg;
  cfg.iters = 6;
  cfg.sub_iters = 2;
  cfg.block_radius_scale = {0.1, 1.0, 1.0, 25.0};
  cfg.on_block_update = [&trace](const sdl::BlockUpdateInfo &info) {
    trace.push_back(info);
  };
  const auto [fin, report] = sdl::bcd_dr(prob, cfg, init);
  REQUIRE(!trace.empty());
  for (const sdl::BlockUpdateInfo &info : trace) {
    const double expect =
        cfg.radius(info.iter) * cfg.block_radius_scale[info.block];
    REQUIRE(info.radius == Catch::Approx(expect).margin(0.0));
    REQUIRE(info.move <= info.radius + 1e-12);
  }

  sdl::BcdConfig bad;
  bad.block_radius_scale = {1.0, 0.0};
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
  sdl::BcdConfig mismatched;
  mismatched.block_radius_scale = {1.0, 1.0};
  REQUIRE_THROWS_AS(sdl::bcd_dr(prob, mismatched, init),
                    std::invalid_argument);
}

TEST_CASE("ball intersection projection lands in both sets") {
  sdl::Rng rng(99);
  const ConstraintSpec c = ConstraintSpec::nonneg_orthant();
  for (int rep = 0; rep < 50; ++rep) {
    const DenseMatrix center =
        sdl::project_constraint(rng.gaussian_matrix(2, 3), c);
    const DenseMatrix y = rng.gaussian_matrix(2, 3, 2.0);
    const double radius = 0.3;
    const DenseMatrix z =
        sdl::detail::project_ball_intersection(y, c, center, radius);
    REQUIRE(sdl::is_feasible(z, c, 0.0));
    REQUIRE(sdl::frobenius_norm(z - center) <= radius + 1e-12);
  }
}
