// sdl/constraints.hpp

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sdl/dense_matrix.hpp"

namespace sdl {

enum class ConstraintKind {
  Unbounded,
  FrobeniusBall,
  NonnegOrthant,
  NonnegFrobeniusBall,
  Box
};

// Declarative convex constraint on one parameter block, with an exact
// Euclidean projection.
struct ConstraintSpec {
  ConstraintKind kind = ConstraintKind::Unbounded;
  double radius = 0.0;  // FrobeniusBall, NonnegFrobeniusBall
  double lo = 0.0;      // Box
  double hi = 0.0;      // Box

  static ConstraintSpec unbounded() { return ConstraintSpec{}; }
  static ConstraintSpec frobenius_ball(double radius) {
    ConstraintSpec c;
    c.kind = ConstraintKind::FrobeniusBall;
    c.radius = radius;
    c.validate();
    return c;
  }
  static ConstraintSpec nonneg_orthant() {
    ConstraintSpec c;
    c.kind = ConstraintKind::NonnegOrthant;
    return c;
  }
  static ConstraintSpec nonneg_frobenius_ball(double radius) {
    ConstraintSpec c;
    c.kind = ConstraintKind::NonnegFrobeniusBall;
    c.radius = radius;
    c.validate();
    return c;
  }
  static ConstraintSpec box(double lo, double hi) {
    ConstraintSpec c;
    c.kind = ConstraintKind::Box;
    c.lo = lo;
    c.hi = hi;
    c.validate();
    return c;
  }

  void validate() const {
    if ((kind == ConstraintKind::FrobeniusBall ||
         kind == ConstraintKind::NonnegFrobeniusBall) &&
        !(radius > 0.0))
      throw std::invalid_argument("ConstraintSpec: radius must be > 0");
    if (kind == ConstraintKind::Box && !(lo <= hi))
      throw std::invalid_argument("ConstraintSpec: box needs lo <= hi");
  }
};

// Euclidean projection onto the constraint set. For NonnegFrobeniusBall the
// projection is clip-to-orthant followed by radial scaling, which is exact
// for the intersection of the orthant with an origin-centered ball.
inline DenseMatrix project_constraint(const DenseMatrix &m,
                                      const ConstraintSpec &c) {
  switch (c.kind) {
    case ConstraintKind::Unbounded:
      return m;
    case ConstraintKind::FrobeniusBall: {
      const double norm = frobenius_norm(m);
      if (norm <= c.radius) return m;
      return (c.radius / norm) * m;
    }
    case ConstraintKind::NonnegOrthant: {
      DenseMatrix out = m;
      for (std::size_t k = 0; k < out.size(); ++k)
        out.data()[k] = std::max(0.0, out.data()[k]);
      return out;
    }
    case ConstraintKind::NonnegFrobeniusBall: {
      DenseMatrix out = m;
      for (std::size_t k = 0; k < out.size(); ++k)
        out.data()[k] = std::max(0.0, out.data()[k]);
      const double norm = frobenius_norm(out);
      if (norm > c.radius) out.scale(c.radius / norm);
      return out;
    }
    case ConstraintKind::Box: {
      DenseMatrix out = m;
      for (std::size_t k = 0; k < out.size(); ++k)
        out.data()[k] = std::min(c.hi, std::max(c.lo, out.data()[k]));
      return out;
    }
  }
  throw std::invalid_argument("project_constraint: unknown constraint kind");
}

inline bool is_feasible(const DenseMatrix &m, const ConstraintSpec &c,
                        double tol = 1e-9) {
  switch (c.kind) {
    case ConstraintKind::Unbounded:
      return true;
    case ConstraintKind::FrobeniusBall:
      return frobenius_norm(m) <= c.radius + tol;
    case ConstraintKind::NonnegOrthant: {
      for (std::size_t k = 0; k < m.size(); ++k)
        if (m.data()[k] < -tol) return false;
      return true;
    }
    case ConstraintKind::NonnegFrobeniusBall: {
      for (std::size_t k = 0; k < m.size(); ++k)
        if (m.data()[k] < -tol) return false;
      return frobenius_norm(m) <= c.radius + tol;
    }
    case ConstraintKind::Box: {
      for (std::size_t k = 0; k < m.size(); ++k)
        if (m.data()[k] < c.lo - tol || m.data()[k] > c.hi + tol) return false;
      return true;
    }
  }
  return false;
}

// Projection onto the Frobenius ball of the given radius around a center
// point, used by trust-region style block updates.
inline DenseMatrix project_ball_around(const DenseMatrix &m,
                                       const DenseMatrix &center,
                                       double radius) {
  DenseMatrix diff = m - center;
  const double norm = frobenius_norm(diff);
  if (norm <= radius) return m;
  diff.scale(radius / norm);
  return center + diff;
}

namespace detail {

// Projection of v onto the halfspace {d : <x, d> <= 0}.
inline DenseMatrix project_halfspace(const DenseMatrix &v,
                                     const DenseMatrix &x) {
  const double inner = dot(x, v);
  if (inner <= 0.0) return v;
  const double xx = dot(x, x);
  if (xx == 0.0) return v;
  DenseMatrix out = v;
  out.add_scaled(x, -inner / xx);
  return out;
}

// Clip the coordinates listed in `active` to be non-negative.
inline DenseMatrix project_active_orthant(const DenseMatrix &v,
                                          const std::vector<char> &active) {
  DenseMatrix out = v;
  for (std::size_t k = 0; k < out.size(); ++k)
    if (active[k] && out.data()[k] < 0.0) out.data()[k] = 0.0;
  return out;
}

}  // namespace detail

// Projects v onto the tangent cone of the constraint set at the feasible
// point x. Closed forms for single conditions; Dykstra's alternating scheme
// for the orthant-and-sphere intersection.
inline DenseMatrix tangent_cone_project(const DenseMatrix &v,
                                        const DenseMatrix &x,
                                        const ConstraintSpec &c) {
  const double act_tol = 1e-9;
  switch (c.kind) {
    case ConstraintKind::Unbounded:
      return v;
    case ConstraintKind::FrobeniusBall: {
      if (frobenius_norm(x) < c.radius - act_tol) return v;
      return detail::project_halfspace(v, x);
    }
    case ConstraintKind::NonnegOrthant: {
      DenseMatrix out = v;
      for (std::size_t k = 0; k < out.size(); ++k)
        if (x.data()[k] <= act_tol && out.data()[k] < 0.0) out.data()[k] = 0.0;
      return out;
    }
    case ConstraintKind::Box: {
      DenseMatrix out = v;
      for (std::size_t k = 0; k < out.size(); ++k) {
        if (x.data()[k] <= c.lo + act_tol && out.data()[k] < 0.0)
          out.data()[k] = 0.0;
        if (x.data()[k] >= c.hi - act_tol && out.data()[k] > 0.0)
          out.data()[k] = 0.0;
      }
      return out;
    }
    case ConstraintKind::NonnegFrobeniusBall: {
      std::vector<char> active(x.size(), 0);
      for (std::size_t k = 0; k < x.size(); ++k)
        if (x.data()[k] <= act_tol) active[k] = 1;
      const bool sphere_active = frobenius_norm(x) >= c.radius - act_tol;
      if (!sphere_active) return detail::project_active_orthant(v, active);
      // Dykstra iterations between the two cones.
      DenseMatrix z = v;
      DenseMatrix p(v.rows(), v.cols()), q(v.rows(), v.cols());
      for (int it = 0; it < 200; ++it) {
        DenseMatrix y = detail::project_active_orthant(z + p, active);
        p = (z + p) - y;
        z = detail::project_halfspace(y + q, x);
        q = (y + q) - z;
      }
      return z;
    }
  }
  throw std::invalid_argument("tangent_cone_project: unknown constraint kind");
}

// Worst-case normalized descent slope magnitude at x: the norm of the
// projection of -grad onto the tangent cone. Zero exactly at constrained
// stationary points; equals the gradient norm at interior points.
inline double stationarity_measure(const DenseMatrix &grad,
                                   const DenseMatrix &x,
                                   const ConstraintSpec &c) {
  DenseMatrix neg = grad;
  neg.scale(-1.0);
  return frobenius_norm(tangent_cone_project(neg, x, c));
}

}  // namespace sdl
