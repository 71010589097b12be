// sdl/generative.hpp

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sdl/classifier.hpp"
#include "sdl/dense_matrix.hpp"
#include "sdl/loss.hpp"
#include "sdl/problem.hpp"
#include "sdl/rng.hpp"
#include "sdl/solvers.hpp"

namespace sdl {

// ---------------------------------------------------------------------------
// Generative model descriptions
// ---------------------------------------------------------------------------

enum class GenerativeVariant { WeakFilter, WeakFeature, StrongFilter };

struct GenerativeParams {
  GenerativeVariant variant = GenerativeVariant::WeakFilter;
  std::size_t kappa = 1;
  std::size_t p = 1;
  std::size_t q = 0;
  std::size_t n = 1;
  std::size_t r = 1;
  double sigma = 0.1;
  double sigma_aux = 0.1;
  ScoreFunction h = score_exp();

  // Weak-variant truth: lifted classifier/reconstruction pair plus the aux
  // channel mean C* (q x n).
  LiftedState truth;
  DenseMatrix truth_c;

  // Strong-variant truth: dictionary, shared code, classifier, aux mean.
  DenseMatrix truth_w;       // p x r
  DenseMatrix truth_shared;  // r x 1
  DenseMatrix truth_beta;    // r x kappa
  DenseMatrix truth_gamma;   // q x kappa
  DenseMatrix truth_lambda;  // q x 1
};

struct SampledData {
  DenseMatrix x_data;
  DenseMatrix x_aux;
  std::vector<int> labels;
};

namespace detail {

inline void check_weak_shapes(const GenerativeParams &gp, bool feature) {
  const std::size_t a_rows = feature ? gp.kappa : gp.p;
  const std::size_t a_cols = feature ? gp.n : gp.kappa;
  if (gp.truth.a.rows() != a_rows || gp.truth.a.cols() != a_cols)
    throw std::invalid_argument("generative: truth A shape mismatch");
  if (gp.truth.b.rows() != gp.p || gp.truth.b.cols() != gp.n)
    throw std::invalid_argument("generative: truth B shape mismatch");
  if (gp.truth.gamma.rows() != gp.q || gp.truth.gamma.cols() != gp.kappa)
    throw std::invalid_argument("generative: truth Gamma shape mismatch");
  if (gp.q > 0 && (gp.truth_c.rows() != gp.q || gp.truth_c.cols() != gp.n))
    throw std::invalid_argument("generative: truth C shape mismatch");
  if (!(gp.sigma > 0.0) || !(gp.sigma_aux > 0.0))
    throw std::invalid_argument("generative: noise levels must be positive");
}

inline int draw_label(const std::vector<double> &act, const ScoreFunction &h,
                      Rng *rng) {
  return static_cast<int>(rng->categorical(predictive_distribution(act, h)));
}

}  // namespace detail

// Weak filter model: noisy reconstruction columns, noisy aux columns, labels
// from the filter activation of the noisy sample.
inline SampledData sample_weak_filter(const GenerativeParams &gp,
                                      std::uint64_t seed) {
  if (gp.variant != GenerativeVariant::WeakFilter)
    throw std::invalid_argument("sample_weak_filter: wrong variant");
  detail::check_weak_shapes(gp, false);
  Rng rng(seed);
  SampledData out;
  out.x_data = DenseMatrix(gp.p, gp.n);
  out.x_aux = DenseMatrix(gp.q, gp.n);
  out.labels.resize(gp.n);
  for (std::size_t s = 0; s < gp.n; ++s) {
    for (std::size_t a = 0; a < gp.p; ++a)
      out.x_data(a, s) = gp.truth.b(a, s) + gp.sigma * rng.gaussian();
    for (std::size_t c = 0; c < gp.q; ++c)
      out.x_aux(c, s) = gp.truth_c(c, s) + gp.sigma_aux * rng.gaussian();
    std::vector<double> act(gp.kappa, 0.0);
    for (std::size_t j = 0; j < gp.kappa; ++j) {
      double acc = 0.0;
      for (std::size_t a = 0; a < gp.p; ++a)
        acc += gp.truth.a(a, j) * out.x_data(a, s);
      for (std::size_t c = 0; c < gp.q; ++c)
        acc += gp.truth.gamma(c, j) * out.x_aux(c, s);
      act[j] = acc;
    }
    out.labels[s] = detail::draw_label(act, gp.h, &rng);
  }
  return out;
}

// Weak feature model: as above, with the activation read from the sample's
// own column of A* instead of a filter product.
inline SampledData sample_weak_feature(const GenerativeParams &gp,
                                       std::uint64_t seed) {
  if (gp.variant != GenerativeVariant::WeakFeature)
    throw std::invalid_argument("sample_weak_feature: wrong variant");
  detail::check_weak_shapes(gp, true);
  Rng rng(seed);
  SampledData out;
  out.x_data = DenseMatrix(gp.p, gp.n);
  out.x_aux = DenseMatrix(gp.q, gp.n);
  out.labels.resize(gp.n);
  for (std::size_t s = 0; s < gp.n; ++s) {
    for (std::size_t a = 0; a < gp.p; ++a)
      out.x_data(a, s) = gp.truth.b(a, s) + gp.sigma * rng.gaussian();
    for (std::size_t c = 0; c < gp.q; ++c)
      out.x_aux(c, s) = gp.truth_c(c, s) + gp.sigma_aux * rng.gaussian();
    std::vector<double> act(gp.kappa, 0.0);
    for (std::size_t j = 0; j < gp.kappa; ++j) {
      double acc = gp.truth.a(j, s);
      for (std::size_t c = 0; c < gp.q; ++c)
        acc += gp.truth.gamma(c, j) * out.x_aux(c, s);
      act[j] = acc;
    }
    out.labels[s] = detail::draw_label(act, gp.h, &rng);
  }
  return out;
}

// Strong filter model: every sample shares the code h*, so the data columns
// are i.i.d. around W* h*.
inline SampledData sample_strong_filter(const GenerativeParams &gp,
                                        std::uint64_t seed) {
  if (gp.variant != GenerativeVariant::StrongFilter)
    throw std::invalid_argument("sample_strong_filter: wrong variant");
  if (gp.truth_w.rows() != gp.p || gp.truth_w.cols() != gp.r ||
      gp.truth_shared.rows() != gp.r || gp.truth_shared.cols() != 1 ||
      gp.truth_beta.rows() != gp.r || gp.truth_beta.cols() != gp.kappa ||
      gp.truth_gamma.rows() != gp.q || gp.truth_gamma.cols() != gp.kappa ||
      (gp.q > 0 && (gp.truth_lambda.rows() != gp.q || gp.truth_lambda.cols() != 1)))
    throw std::invalid_argument("sample_strong_filter: truth shape mismatch");
  if (!(gp.sigma > 0.0) || !(gp.sigma_aux > 0.0))
    throw std::invalid_argument("generative: noise levels must be positive");
  const DenseMatrix mean = matmul(gp.truth_w, gp.truth_shared);  // p x 1
  Rng rng(seed);
  SampledData out;
  out.x_data = DenseMatrix(gp.p, gp.n);
  out.x_aux = DenseMatrix(gp.q, gp.n);
  out.labels.resize(gp.n);
  const DenseMatrix wb = matmul(gp.truth_w, gp.truth_beta);  // p x kappa
  for (std::size_t s = 0; s < gp.n; ++s) {
    for (std::size_t a = 0; a < gp.p; ++a)
      out.x_data(a, s) = mean(a, 0) + gp.sigma * rng.gaussian();
    for (std::size_t c = 0; c < gp.q; ++c)
      out.x_aux(c, s) = gp.truth_lambda(c, 0) + gp.sigma_aux * rng.gaussian();
    std::vector<double> act(gp.kappa, 0.0);
    for (std::size_t j = 0; j < gp.kappa; ++j) {
      double acc = 0.0;
      for (std::size_t a = 0; a < gp.p; ++a) acc += wb(a, j) * out.x_data(a, s);
      for (std::size_t c = 0; c < gp.q; ++c)
        acc += gp.truth_gamma(c, j) * out.x_aux(c, s);
      act[j] = acc;
    }
    out.labels[s] = detail::draw_label(act, gp.h, &rng);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Deterministic truth generators for the simulators
// ---------------------------------------------------------------------------

// Weak truth with stacked rank <= r: the classifier and reconstruction parts
// share a common left factor. The classifier scale controls how sharp the
// sampled labels are. The same seed reproduces the same A* for every n, so
// error curves over an n-grid track one fixed target.
inline GenerativeParams make_weak_instance(GenerativeVariant variant,
                                           std::size_t p, std::size_t n,
                                           std::size_t q, std::size_t r,
                                           std::size_t kappa, double sigma,
                                           double sigma_aux,
                                           std::uint64_t seed,
                                           double beta_scale = 1.0) {
  if (variant == GenerativeVariant::StrongFilter)
    throw std::invalid_argument("make_weak_instance: weak variants only");
  GenerativeParams gp;
  gp.variant = variant;
  gp.kappa = kappa;
  gp.p = p;
  gp.q = q;
  gp.n = n;
  gp.r = r;
  gp.sigma = sigma;
  gp.sigma_aux = sigma_aux;
  Rng rng(Rng::derive_seed(seed, 17));
  DenseMatrix left = rng.gaussian_matrix(p, r, 1.0 / std::sqrt(static_cast<double>(r)));
  DenseMatrix beta0 = rng.gaussian_matrix(r, kappa, beta_scale);
  gp.truth.gamma = q > 0 ? rng.gaussian_matrix(q, kappa, beta_scale)
                         : DenseMatrix(q, kappa);
  gp.truth_c = q > 0 ? rng.gaussian_matrix(q, n, 1.0) : DenseMatrix(q, n);
  DenseMatrix codes = rng.uniform_matrix(r, n, 0.0, 1.0);
  gp.truth.b = matmul(left, codes);
  if (variant == GenerativeVariant::WeakFilter) {
    gp.truth.a = matmul(left, beta0);  // p x kappa, rank ties to B
  } else {
    gp.truth.a = matmul(beta0, codes, true);  // kappa x n
  }
  return gp;
}

inline GenerativeParams make_strong_instance(std::size_t p, std::size_t n,
                                             std::size_t q, std::size_t r,
                                             std::size_t kappa, double sigma,
                                             double sigma_aux,
                                             std::uint64_t seed,
                                             double beta_scale = 1.0) {
  GenerativeParams gp;
  gp.variant = GenerativeVariant::StrongFilter;
  gp.kappa = kappa;
  gp.p = p;
  gp.q = q;
  gp.n = n;
  gp.r = r;
  gp.sigma = sigma;
  gp.sigma_aux = sigma_aux;
  Rng rng(Rng::derive_seed(seed, 29));
  gp.truth_w = rng.gaussian_matrix(p, r, 1.0 / std::sqrt(static_cast<double>(r)));
  gp.truth_shared = rng.uniform_matrix(r, 1, 0.5, 1.0);
  gp.truth_beta = rng.gaussian_matrix(r, kappa, beta_scale);
  gp.truth_gamma = q > 0 ? rng.gaussian_matrix(q, kappa, beta_scale)
                         : DenseMatrix(q, kappa);
  gp.truth_lambda = q > 0 ? rng.gaussian_matrix(q, 1, 1.0) : DenseMatrix(q, 1);
  return gp;
}

// ---------------------------------------------------------------------------
// Estimation pipelines
// ---------------------------------------------------------------------------

struct WeakEstimateResult {
  LiftedState lifted;
  FactorState factors;
  SolverReport report;
  double tau_used = 0.0;
  bool used_fallback = false;
};

// Convex lifted estimation with the noise-matched weight xi = 1/(2 sigma^2)
// and a logarithmic iteration budget. The stepsize comes from conditioning
// when the instance is well conditioned; otherwise the default 0.01 is
// capped by a universal curvature bound so that large xi cannot make the
// fixed default diverge.
inline WeakEstimateResult estimate_weak(GenerativeVariant variant,
                                        const SampledData &data,
                                        std::size_t rank, std::size_t kappa,
                                        double sigma, double nu,
                                        std::size_t t_iters = 0) {
  if (variant == GenerativeVariant::StrongFilter)
    throw std::invalid_argument("estimate_weak: weak variants only");
  if (!(sigma > 0.0))
    throw std::invalid_argument("estimate_weak: sigma must be positive");
  SdlProblem prob;
  prob.x_data = data.x_data;
  prob.x_aux = data.x_aux;
  prob.labels = data.labels;
  prob.kappa = kappa;
  prob.rank = rank;
  prob.xi = 1.0 / (2.0 * sigma * sigma);
  prob.nu = nu;
  prob.mode = variant == GenerativeVariant::WeakFilter ? Mode::Filter
                                                       : Mode::Feature;
  prob.validate();
  const std::size_t n = prob.n();
  const std::size_t iters =
      t_iters > 0 ? t_iters
                  : static_cast<std::size_t>(
                        std::ceil(10.0 * std::log(static_cast<double>(n))));
  const ConditioningReport cond = conditioning(prob, 1.0);
  WeakEstimateResult out;
  if (cond.condition_ok) {
    out.tau_used = cond.tau_mid();
    out.used_fallback = false;
  } else {
    const double l_safe =
        std::max(2.0 * prob.xi,
                 2.0 * prob.nu + static_cast<double>(n) * cond.delta_plus);
    out.tau_used = std::min(0.01, 1.0 / l_safe);
    out.used_fallback = true;
  }
  LpgdConfig cfg;
  cfg.tau = out.tau_used;
  cfg.iters = iters;
  cfg.rank = rank;
  const LiftedState init = LiftedState::zeros(prob);
  ConvResult res = prob.mode == Mode::Filter ? sdl_conv_filt(prob, cfg, init)
                                             : sdl_conv_feat(prob, cfg, init);
  out.lifted = std::move(res.lifted);
  out.factors = std::move(res.factors);
  out.report = std::move(res.report);
  return out;
}

struct StrongEstimateResult {
  FactorState factors;  // h holds the shared r x 1 code
  DenseMatrix lambda_hat;
  SolverReport report;
};

// Shared-code maximum likelihood via BCD-DR: the aux mean is estimated in
// closed form as the empirical column mean, the remaining blocks minimize
// the penalized likelihood with regularizer n nu (|W|^2 + |h|^2 + |lambda|^2
// + |Gamma|^2). The classifier block beta is unpenalized.
inline StrongEstimateResult estimate_strong(const SampledData &data,
                                            std::size_t rank,
                                            std::size_t kappa, double sigma,
                                            double nu, std::size_t t_iters = 0,
                                            std::uint64_t init_seed = 1) {
  if (!(sigma > 0.0))
    throw std::invalid_argument("estimate_strong: sigma must be positive");
  const std::size_t p = data.x_data.rows();
  const std::size_t n = data.x_data.cols();
  const std::size_t q = data.x_aux.rows();
  StrongEstimateResult out;
  out.lambda_hat = DenseMatrix(q, 1);
  for (std::size_t c = 0; c < q; ++c) {
    double acc = 0.0;
    for (std::size_t s = 0; s < n; ++s) acc += data.x_aux(c, s);
    out.lambda_hat(c, 0) = acc / static_cast<double>(n);
  }

  SdlProblem base;
  base.x_data = data.x_data;
  base.x_aux = data.x_aux;
  base.labels = data.labels;
  base.kappa = kappa;
  base.rank = rank;
  base.xi = 1.0 / (2.0 * sigma * sigma);
  base.nu = 0.0;  // the shared-code regularizer is added explicitly below
  base.mode = Mode::Filter;
  base.validate();

  const double nd = static_cast<double>(n);
  const double reg = nd * nu;
  const double lambda_penalty = reg * dot(out.lambda_hat, out.lambda_hat);
  auto expand = [&base, n](const std::vector<DenseMatrix> &blocks) {
    FactorState st;
    st.w = blocks[0];
    st.beta = blocks[1];
    st.gamma = blocks[2];
    st.h = DenseMatrix(blocks[3].rows(), n);
    for (std::size_t b = 0; b < blocks[3].rows(); ++b)
      for (std::size_t s = 0; s < n; ++s) st.h(b, s) = blocks[3](b, 0);
    return st;
  };
  BlockProblem f;
  f.value = [&base, expand, reg, lambda_penalty](
                const std::vector<DenseMatrix> &blocks) {
    const FactorState st = expand(blocks);
    double v = loss_separate(base, st);
    const double w2 = dot(blocks[0], blocks[0]);
    const double h2 = dot(blocks[3], blocks[3]);
    const double g2 = dot(blocks[2], blocks[2]);
    return v + reg * (w2 + h2 + g2) + lambda_penalty;
  };
  f.block_grad = [&base, expand, reg](const std::vector<DenseMatrix> &blocks,
                                      std::size_t i) {
    const FactorState g = grad_blocks(base, expand(blocks));
    switch (i) {
      case 0: {
        DenseMatrix out_g = g.w;
        out_g.add_scaled(blocks[0], 2.0 * reg);
        return out_g;
      }
      case 1:
        return g.beta;
      case 2: {
        DenseMatrix out_g = g.gamma;
        out_g.add_scaled(blocks[2], 2.0 * reg);
        return out_g;
      }
      default: {
        DenseMatrix out_g(blocks[3].rows(), 1);
        for (std::size_t b = 0; b < g.h.rows(); ++b) {
          double acc = 0.0;
          for (std::size_t s = 0; s < g.h.cols(); ++s) acc += g.h(b, s);
          out_g(b, 0) = acc;
        }
        out_g.add_scaled(blocks[3], 2.0 * reg);
        return out_g;
      }
    }
  };
  f.constraints = {ConstraintSpec::unbounded(), ConstraintSpec::unbounded(),
                   ConstraintSpec::unbounded(), ConstraintSpec::unbounded()};

  Rng rng(Rng::derive_seed(init_seed, 3));
  std::vector<DenseMatrix> blocks = {
      rng.uniform_matrix(p, rank, 0.0, 0.1), DenseMatrix(rank, kappa),
      DenseMatrix(q, kappa), rng.uniform_matrix(rank, 1, 0.0, 0.1)};
  BcdConfig cfg;
  cfg.iters = t_iters > 0
                  ? t_iters
                  : static_cast<std::size_t>(
                        std::ceil(10.0 * std::log(static_cast<double>(n))));
  auto [final_blocks, report] = bcd_dr_generic(f, cfg, std::move(blocks));
  out.factors.w = final_blocks[0];
  out.factors.beta = final_blocks[1];
  out.factors.gamma = final_blocks[2];
  out.factors.h = final_blocks[3];
  out.report = std::move(report);
  return out;
}

// ---------------------------------------------------------------------------
// Semi-synthetic image-like benchmark data
// ---------------------------------------------------------------------------

struct SemiSyntheticSpec {
  std::size_t p = 784;
  std::size_t n = 500;
  std::size_t r_bar = 20;
  std::size_t r = 2;
  std::size_t kappa = 1;
  double sigma = 0.5;
  DenseMatrix basis_x;  // p x r_bar reconstruction dictionary
  DenseMatrix basis_y;  // p x r_bar discriminative dictionary
  std::vector<double> beta_true_y = {1.0, -1.0};
};

struct SemiSyntheticData {
  DenseMatrix x_data;
  std::vector<int> labels;
  DenseMatrix codes;            // r_bar x n, entries in [0,1)
  DenseMatrix x_clean;          // basis_x * codes, before noise
  std::vector<double> label_direction;  // pooled discriminative vector
};

// Pre-feature columns are nonnegative combinations of the reconstruction
// basis plus Gaussian noise; binary labels follow a logistic read-out of the
// pooled discriminative basis applied to the noisy sample.
inline SemiSyntheticData make_semisynthetic(const SemiSyntheticSpec &spec,
                                            std::uint64_t seed) {
  if (spec.basis_x.rows() != spec.p || spec.basis_x.cols() != spec.r_bar)
    throw std::invalid_argument("make_semisynthetic: basis_x shape mismatch");
  if (spec.basis_y.rows() != spec.p || spec.basis_y.cols() != spec.r_bar)
    throw std::invalid_argument("make_semisynthetic: basis_y shape mismatch");
  if (spec.beta_true_y.size() != 2)
    throw std::invalid_argument(
        "make_semisynthetic: beta_true_y must have two pooled entries");
  if (spec.r_bar < 2 || spec.kappa != 1)
    throw std::invalid_argument("make_semisynthetic: need r_bar >= 2, kappa = 1");
  Rng rng(seed);
  SemiSyntheticData out;
  out.codes = rng.uniform_matrix(spec.r_bar, spec.n, 0.0, 1.0);
  out.x_clean = matmul(spec.basis_x, out.codes);
  out.x_data = out.x_clean;
  if (spec.sigma > 0.0) {
    for (std::size_t s = 0; s < spec.n; ++s)
      for (std::size_t a = 0; a < spec.p; ++a)
        out.x_data(a, s) += spec.sigma * rng.gaussian();
  }
  // Pool the two halves of the discriminative basis by column means and
  // weight them by beta_true_y.
  const std::size_t half = spec.r_bar / 2;
  out.label_direction.assign(spec.p, 0.0);
  for (std::size_t a = 0; a < spec.p; ++a) {
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < half; ++k) m1 += spec.basis_y(a, k);
    for (std::size_t k = half; k < spec.r_bar; ++k) m2 += spec.basis_y(a, k);
    m1 /= static_cast<double>(half);
    m2 /= static_cast<double>(spec.r_bar - half);
    out.label_direction[a] =
        spec.beta_true_y[0] * m1 + spec.beta_true_y[1] * m2;
  }
  out.labels.resize(spec.n);
  for (std::size_t s = 0; s < spec.n; ++s) {
    double a_val = 0.0;
    for (std::size_t a = 0; a < spec.p; ++a)
      a_val += out.label_direction[a] * out.x_data(a, s);
    const double prob = 1.0 / (1.0 + std::exp(-a_val));
    out.labels[s] = rng.uniform() < prob ? 1 : 0;
  }
  return out;
}

namespace detail {

inline double blob_value(std::size_t idx, std::size_t side, double cx,
                         double cy, double width, double amp) {
  const double x = static_cast<double>(idx % side);
  const double y = static_cast<double>(idx / side);
  const double dx = x - cx;
  const double dy = y - cy;
  return amp * std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
}

}  // namespace detail

// Bundled bases: smooth nonnegative blobs for reconstruction, and a
// discriminative basis orthogonalized against the reconstruction span so the
// label signal is invisible to unsupervised rank-r compression. The pooled
// discriminative direction is rescaled to a fixed norm so labels are sharp.
inline SemiSyntheticSpec bundled_semisynthetic_spec(
    double label_direction_norm = 14.0) {
  SemiSyntheticSpec spec;
  const std::size_t side = 28;
  spec.basis_x = DenseMatrix(spec.p, spec.r_bar);
  spec.basis_y = DenseMatrix(spec.p, spec.r_bar);
  // Reconstruction blobs on a 4 x 5 grid.
  for (std::size_t k = 0; k < spec.r_bar; ++k) {
    const double cx = 4.0 + 5.0 * static_cast<double>(k % 5);
    const double cy = 4.0 + 6.5 * static_cast<double>(k / 5);
    for (std::size_t a = 0; a < spec.p; ++a)
      spec.basis_x(a, k) = detail::blob_value(a, side, cx, cy, 3.5, 2.0);
  }
  // Discriminative blobs on an offset grid, narrower.
  for (std::size_t k = 0; k < spec.r_bar; ++k) {
    const double cx = 6.0 + 4.5 * static_cast<double>(k % 5);
    const double cy = 6.0 + 5.5 * static_cast<double>(k / 5);
    for (std::size_t a = 0; a < spec.p; ++a)
      spec.basis_y(a, k) = detail::blob_value(a, side, cx, cy, 2.0, 2.0);
  }
  // Orthonormalize the reconstruction basis span and project it out of every
  // discriminative column.
  std::vector<DenseMatrix> ortho;
  for (std::size_t k = 0; k < spec.r_bar; ++k) {
    DenseMatrix col(spec.p, 1);
    for (std::size_t a = 0; a < spec.p; ++a) col(a, 0) = spec.basis_x(a, k);
    for (const DenseMatrix &u : ortho) col.add_scaled(u, -dot(u, col));
    const double norm = frobenius_norm(col);
    if (norm > 1e-10) {
      col.scale(1.0 / norm);
      ortho.push_back(col);
    }
  }
  for (std::size_t k = 0; k < spec.r_bar; ++k) {
    DenseMatrix col(spec.p, 1);
    for (std::size_t a = 0; a < spec.p; ++a) col(a, 0) = spec.basis_y(a, k);
    for (const DenseMatrix &u : ortho) col.add_scaled(u, -dot(u, col));
    for (std::size_t a = 0; a < spec.p; ++a) spec.basis_y(a, k) = col(a, 0);
  }
  // Rescale so the pooled difference direction has the requested norm.
  const std::size_t half = spec.r_bar / 2;
  DenseMatrix pooled(spec.p, 1);
  for (std::size_t a = 0; a < spec.p; ++a) {
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < half; ++k) m1 += spec.basis_y(a, k);
    for (std::size_t k = half; k < spec.r_bar; ++k) m2 += spec.basis_y(a, k);
    pooled(a, 0) = m1 / static_cast<double>(half) -
                   m2 / static_cast<double>(spec.r_bar - half);
  }
  const double norm = frobenius_norm(pooled);
  if (norm > 0.0) {
    const double factor = label_direction_norm / norm;
    for (std::size_t k = 0; k < spec.r_bar * spec.p; ++k)
      spec.basis_y.data()[k] *= factor;
  }
  return spec;
}

}  // namespace sdl
