// tests/test_constraints.cpp
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "sdl/constraints.hpp"
#include "sdl/dense_matrix.hpp"
#include "sdl/rng.hpp"

using sdl::ConstraintSpec;
using sdl::DenseMatrix;

namespace {

std::vector<ConstraintSpec> all_kinds() {
  return {ConstraintSpec::unbounded(), ConstraintSpec::frobenius_ball(1.5),
          ConstraintSpec::nonneg_orthant(),
          ConstraintSpec::nonneg_frobenius_ball(2.0),
          ConstraintSpec::box(-0.5, 1.0)};
}

// Draws a random point of the constraint set by projecting a random matrix.
DenseMatrix random_feasible(sdl::Rng &rng, std::size_t rows, std::size_t cols,
                            const ConstraintSpec &c) {
  return sdl::project_constraint(rng.gaussian_matrix(rows, cols), c);
}

}  // namespace

TEST_CASE("constraint factories validate their parameters") {
  REQUIRE_THROWS_AS(ConstraintSpec::frobenius_ball(0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(ConstraintSpec::nonneg_frobenius_ball(-1.0),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(ConstraintSpec::box(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("projection onto the nonnegative ball clips then rescales") {
  const ConstraintSpec c = ConstraintSpec::nonneg_frobenius_ball(1.0);
  const DenseMatrix y = DenseMatrix::from_rows({{-1.0, 2.0}, {0.0, 0.0}});
  const DenseMatrix p = sdl::project_constraint(y, c);
  REQUIRE(p(0, 0) == 0.0);
  REQUIRE(p(0, 1) == Catch::Approx(1.0).margin(1e-15));
  REQUIRE(p(1, 0) == 0.0);
  REQUIRE(p(1, 1) == 0.0);
}

TEST_CASE("projections are idempotent and non-expansive") {
  sdl::Rng rng(11);
  for (const ConstraintSpec &c : all_kinds()) {
    for (int rep = 0; rep < 100; ++rep) {
      const DenseMatrix x = rng.gaussian_matrix(3, 4, 2.0);
      const DenseMatrix y = rng.gaussian_matrix(3, 4, 2.0);
      const DenseMatrix px = sdl::project_constraint(x, c);
      const DenseMatrix py = sdl::project_constraint(y, c);
      REQUIRE(sdl::is_feasible(px, c));
      REQUIRE(sdl::frobenius_norm(sdl::project_constraint(px, c) - px) <
              1e-12);
      REQUIRE(sdl::frobenius_norm(px - py) <=
              sdl::frobenius_norm(x - y) + 1e-12);
    }
  }
}

TEST_CASE("projection is the closest feasible point") {
  sdl::Rng rng(29);
  for (const ConstraintSpec &c : all_kinds()) {
    for (int rep = 0; rep < 10; ++rep) {
      const DenseMatrix y = rng.gaussian_matrix(2, 3, 2.0);
      const DenseMatrix p = sdl::project_constraint(y, c);
      const double best = sdl::frobenius_norm(y - p);
      for (int s = 0; s < 200; ++s) {
        const DenseMatrix z = random_feasible(rng, 2, 3, c);
        REQUIRE(sdl::frobenius_norm(y - z) >= best - 1e-10);
        // Variational inequality characterizing convex projection.
        REQUIRE(sdl::dot(y - p, z - p) <= 1e-9);
      }
    }
  }
}

TEST_CASE("feasibility checks match the set definitions") {
  const ConstraintSpec ball = ConstraintSpec::frobenius_ball(1.0);
  DenseMatrix v(1, 2);
  v(0, 0) = 0.6;
  v(0, 1) = 0.6;
  REQUIRE(sdl::is_feasible(v, ball));
  v(0, 1) = 0.9;
  REQUIRE_FALSE(sdl::is_feasible(v, ball));

  const ConstraintSpec orth = ConstraintSpec::nonneg_orthant();
  REQUIRE_FALSE(sdl::is_feasible(DenseMatrix(1, 1, -1.0), orth));
  REQUIRE(sdl::is_feasible(DenseMatrix(1, 1, -1e-12), orth));

  const ConstraintSpec box = ConstraintSpec::box(0.0, 1.0);
  REQUIRE(sdl::is_feasible(DenseMatrix(2, 2, 0.5), box));
  REQUIRE_FALSE(sdl::is_feasible(DenseMatrix(2, 2, 1.5), box));
}

TEST_CASE("ball projection around a center respects the radius") {
  const DenseMatrix center = DenseMatrix::from_rows({{1.0, 1.0}});
  const DenseMatrix inside = DenseMatrix::from_rows({{1.2, 1.0}});
  const DenseMatrix kept = sdl::project_ball_around(inside, center, 0.5);
  REQUIRE(sdl::max_abs(kept - inside) == 0.0);

  const DenseMatrix outside = DenseMatrix::from_rows({{3.0, 1.0}});
  const DenseMatrix pulled = sdl::project_ball_around(outside, center, 0.5);
  REQUIRE(sdl::frobenius_norm(pulled - center) ==
          Catch::Approx(0.5).margin(1e-12));
  REQUIRE(pulled(0, 0) == Catch::Approx(1.5).margin(1e-12));
  REQUIRE(pulled(0, 1) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("tangent cone at interior points is the whole space") {
  sdl::Rng rng(37);
  const DenseMatrix v = rng.gaussian_matrix(2, 2);
  const ConstraintSpec ball = ConstraintSpec::frobenius_ball(10.0);
  const DenseMatrix x = rng.gaussian_matrix(2, 2, 0.1);
  REQUIRE(sdl::max_abs(sdl::tangent_cone_project(v, x, ball) - v) == 0.0);

  DenseMatrix pos(2, 2, 1.0);
  const ConstraintSpec orth = ConstraintSpec::nonneg_orthant();
  REQUIRE(sdl::max_abs(sdl::tangent_cone_project(v, pos, orth) - v) == 0.0);
}

TEST_CASE("tangent cone of the orthant at the origin clips negatives") {
  const DenseMatrix v = DenseMatrix::from_rows({{-1.0, 2.0}, {3.0, -4.0}});
  const DenseMatrix at = DenseMatrix(2, 2);
  const DenseMatrix proj =
      sdl::tangent_cone_project(v, at, ConstraintSpec::nonneg_orthant());
  REQUIRE(proj(0, 0) == 0.0);
  REQUIRE(proj(0, 1) == 2.0);
  REQUIRE(proj(1, 0) == 3.0);
  REQUIRE(proj(1, 1) == 0.0);
}

TEST_CASE("tangent cone on the sphere is the inward halfspace") {
  sdl::Rng rng(43);
  const ConstraintSpec ball = ConstraintSpec::frobenius_ball(1.0);
  DenseMatrix x = rng.gaussian_matrix(2, 3);
  x.scale(1.0 / sdl::frobenius_norm(x));
  const DenseMatrix v = rng.gaussian_matrix(2, 3);
  const DenseMatrix proj = sdl::tangent_cone_project(v, x, ball);
  REQUIRE(sdl::dot(proj, x) <= 1e-10);
  // The removed part is parallel to the outward normal.
  const DenseMatrix removed = v - proj;
  const double along = sdl::dot(removed, x);
  DenseMatrix residual = removed;
  residual.add_scaled(x, -along);
  REQUIRE(sdl::frobenius_norm(residual) < 1e-10);
}

TEST_CASE("tangent cone projection is optimal against sampled directions") {
  sdl::Rng rng(53);
  const std::vector<ConstraintSpec> cases = {
      ConstraintSpec::frobenius_ball(1.0), ConstraintSpec::nonneg_orthant(),
      ConstraintSpec::nonneg_frobenius_ball(1.0), ConstraintSpec::box(0.0, 1.0)};
  for (const ConstraintSpec &c : cases) {
    for (int rep = 0; rep < 5; ++rep) {
      // Project a scaled draw so ball-type sets land on their boundary and
      // orthant-type sets pick up active coordinates.
      const DenseMatrix x =
          sdl::project_constraint(rng.gaussian_matrix(2, 3, 3.0), c);
      const DenseMatrix v = rng.gaussian_matrix(2, 3);
      const DenseMatrix proj = sdl::tangent_cone_project(v, x, c);
      // Projection onto a closed convex cone: the residual is orthogonal to
      // the output and makes a non-positive inner product with every cone
      // direction. Feasible directions are sampled through the set map.
      REQUIRE(std::fabs(sdl::dot(v - proj, proj)) < 1e-6);
      const double eps = 1e-6;
      for (int s = 0; s < 100; ++s) {
        const DenseMatrix step = rng.gaussian_matrix(2, 3);
        DenseMatrix probe = x;
        probe.add_scaled(step, eps);
        DenseMatrix d = sdl::project_constraint(probe, c) - x;
        d.scale(1.0 / eps);
        REQUIRE(sdl::dot(v - proj, d) <= 1e-4);
      }
    }
  }
}

TEST_CASE("stationarity measure vanishes at constrained minima") {
  sdl::Rng rng(61);
  const std::vector<ConstraintSpec> cases = {
      ConstraintSpec::frobenius_ball(1.0), ConstraintSpec::nonneg_orthant(),
      ConstraintSpec::nonneg_frobenius_ball(1.0), ConstraintSpec::box(-1.0, 1.0)};
  for (const ConstraintSpec &c : cases) {
    for (int rep = 0; rep < 20; ++rep) {
      // For f(z) = 0.5 ||z - y||^2 the constrained minimum is P(y), where
      // the negative gradient y - P(y) lies in the normal cone.
      const DenseMatrix y = rng.gaussian_matrix(2, 3, 2.0);
      const DenseMatrix xstar = sdl::project_constraint(y, c);
      const DenseMatrix grad = xstar - y;
      REQUIRE(sdl::stationarity_measure(grad, xstar, c) < 1e-7);
    }
  }

  // At interior points the measure equals the plain gradient norm.
  const DenseMatrix g = DenseMatrix::from_rows({{3.0, 4.0}});
  const DenseMatrix x0 = DenseMatrix::from_rows({{0.1, 0.1}});
  REQUIRE(sdl::stationarity_measure(g, x0,
                                    ConstraintSpec::frobenius_ball(5.0)) ==
          Catch::Approx(5.0).margin(1e-12));
}
