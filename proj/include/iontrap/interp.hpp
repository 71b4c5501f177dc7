#pragma once

// Bicubic Hermite interpolation of node data on a uniform grid, with exact
// analytic first and second derivatives of the interpolated surface.  Corner
// derivatives come from central differences (one-sided at grid edges), which
// makes the surface C1 across cell boundaries; Hessians are the analytic
// second derivatives of the per-cell polynomial, so Newton searches need no
// finite-difference step tuning.

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "iontrap/errors.hpp"
#include "iontrap/grid.hpp"

namespace iontrap {

template <typename Scalar>
class Bicubic {
 public:
  // Keeps references; both grid and values must outlive the interpolant.
  Bicubic(const Grid& grid, const Array2<Scalar>& values)
      : grid_(&grid), f_(&values) {
    if (values.rows() != grid.nx || values.cols() != grid.ny)
      throw input_error("value array does not match the grid dimensions");
    if (grid.nx < 2 || grid.ny < 2) throw input_error("bicubic needs at least a 2x2 grid");
    const int nx = grid.nx, ny = grid.ny;
    fx_.resize(nx, ny);
    fy_.resize(nx, ny);
    fxy_.resize(nx, ny);
    const auto dx_at = [&](const Array2<Scalar>& a, int i, int j) -> Scalar {
      if (i == 0) return a(1, j) - a(0, j);
      if (i == nx - 1) return a(nx - 1, j) - a(nx - 2, j);
      return (a(i + 1, j) - a(i - 1, j)) / Scalar(2);
    };
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) fx_(i, j) = dx_at(values, i, j);
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        if (j == 0) {
          fy_(i, j) = values(i, 1) - values(i, 0);
        } else if (j == ny - 1) {
          fy_(i, j) = values(i, ny - 1) - values(i, ny - 2);
        } else {
          fy_(i, j) = (values(i, j + 1) - values(i, j - 1)) / Scalar(2);
        }
      }
    }
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) fxy_(i, j) = dx_at(fy_, i, j);
  }

  const Grid& grid() const { return *grid_; }

  struct Sample {
    Scalar f;
    Eigen::Matrix<Scalar, 2, 1> grad;     // d/dx, d/dy (physical units)
    Eigen::Matrix<Scalar, 2, 2> hessian;  // second derivatives
  };

  Scalar value(const Vec2& p) const { return evaluate<0>(p).f; }
  Eigen::Matrix<Scalar, 2, 1> gradient(const Vec2& p) const { return evaluate<1>(p).grad; }
  Sample sample(const Vec2& p) const { return evaluate<2>(p); }

 private:
  // Hermite-to-power-basis conversion for one axis.
  static Eigen::Matrix<Scalar, 4, 4> basis() {
    Eigen::Matrix<Scalar, 4, 4> b;
    b << 1, 0, 0, 0, 0, 0, 1, 0, -3, 3, -2, -1, 2, -2, 1, 1;
    return b;
  }

  template <int Order>
  Sample evaluate(const Vec2& p) const {
    const Grid& g = *grid_;
    const double gx = g.fx(p), gy = g.fy(p);
    const int ci = std::clamp(static_cast<int>(std::floor(gx)), 0, g.nx - 2);
    const int cj = std::clamp(static_cast<int>(std::floor(gy)), 0, g.ny - 2);
    const Scalar t = static_cast<Scalar>(gx - ci);
    const Scalar u = static_cast<Scalar>(gy - cj);

    Eigen::Matrix<Scalar, 4, 4> corner;
    const Array2<Scalar>& f = *f_;
    corner << f(ci, cj), f(ci, cj + 1), fy_(ci, cj), fy_(ci, cj + 1),
        f(ci + 1, cj), f(ci + 1, cj + 1), fy_(ci + 1, cj), fy_(ci + 1, cj + 1),
        fx_(ci, cj), fx_(ci, cj + 1), fxy_(ci, cj), fxy_(ci, cj + 1),
        fx_(ci + 1, cj), fx_(ci + 1, cj + 1), fxy_(ci + 1, cj), fxy_(ci + 1, cj + 1);
    const Eigen::Matrix<Scalar, 4, 4> b = basis();
    const Eigen::Matrix<Scalar, 4, 4> a = b * corner * b.transpose();

    const Eigen::Matrix<Scalar, 4, 1> tp{Scalar(1), t, t * t, t * t * t};
    const Eigen::Matrix<Scalar, 4, 1> up{Scalar(1), u, u * u, u * u * u};

    Sample out;
    out.f = tp.dot(a * up);
    out.grad.setZero();
    out.hessian.setZero();
    if constexpr (Order >= 1) {
      const Eigen::Matrix<Scalar, 4, 1> dt{Scalar(0), Scalar(1), 2 * t, 3 * t * t};
      const Eigen::Matrix<Scalar, 4, 1> du{Scalar(0), Scalar(1), 2 * u, 3 * u * u};
      const Scalar inv_h = Scalar(1) / static_cast<Scalar>(g.h);
      out.grad(0) = dt.dot(a * up) * inv_h;
      out.grad(1) = tp.dot(a * du) * inv_h;
      if constexpr (Order >= 2) {
        const Eigen::Matrix<Scalar, 4, 1> ddt{Scalar(0), Scalar(0), Scalar(2), 6 * t};
        const Eigen::Matrix<Scalar, 4, 1> ddu{Scalar(0), Scalar(0), Scalar(2), 6 * u};
        out.hessian(0, 0) = ddt.dot(a * up) * inv_h * inv_h;
        out.hessian(1, 1) = tp.dot(a * ddu) * inv_h * inv_h;
        out.hessian(0, 1) = out.hessian(1, 0) = dt.dot(a * du) * inv_h * inv_h;
      }
    }
    return out;
  }

  const Grid* grid_;
  const Array2<Scalar>* f_;
  Array2<Scalar> fx_, fy_, fxy_;  // corner derivatives in index units
};

// Newton search on an interpolated surface.  `minimize` insists on descent
// (falls back to a damped gradient step when the Hessian is not positive
// definite); `stationary` takes raw Newton steps and converges to saddles as
// readily as to extrema.
struct NewtonResult {
  Vec2 point = Vec2::Zero();
  double value = 0.0;
  double grad_norm = 0.0;
  Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();
  bool converged = false;
};

namespace detail {

inline Vec2 clamp_to_box(const Vec2& p, const Grid& g) {
  // Stay one cell inside the outer ring, where one-sided stencils start.
  return Vec2(std::clamp(p.x(), g.x(1), g.x(g.nx - 2)),
              std::clamp(p.y(), g.y(1), g.y(g.ny - 2)));
}

}  // namespace detail

inline NewtonResult minimize_bicubic(const Bicubic<double>& f, const Vec2& seed,
                                     double grad_tol, int max_iterations = 100,
                                     double max_step_cells = 2.0) {
  const Grid& g = f.grid();
  const double max_step = max_step_cells * g.h;
  Vec2 p = detail::clamp_to_box(seed, g);
  NewtonResult out;
  for (int it = 0; it < max_iterations; ++it) {
    const auto s = f.sample(p);
    out.point = p;
    out.value = s.f;
    out.grad_norm = s.grad.norm();
    out.hessian = s.hessian;
    if (out.grad_norm <= grad_tol) {
      out.converged = true;
      return out;
    }
    Vec2 step;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(s.hessian);
    if (eig.eigenvalues()(0) > 0.0) {
      step = -s.hessian.inverse() * s.grad;
    } else {
      step = -s.grad * (g.h / out.grad_norm);  // one-cell descent step
    }
    const double len = step.norm();
    if (len > max_step) step *= max_step / len;
    // Backtrack until the move does not increase the value; sub-half-cell
    // moves are accepted outright so roundoff-flat basins cannot stall.
    Vec2 next = detail::clamp_to_box(p + step, g);
    if (step.norm() >= 0.5 * g.h) {
      const double slack = 1e-12 * (std::abs(s.f) + 1e-300);
      double scale = 1.0;
      bool accepted = false;
      for (int k = 0; k < 6; ++k) {
        next = detail::clamp_to_box(p + scale * step, g);
        if (f.value(next) <= s.f + slack) {
          accepted = true;
          break;
        }
        scale *= 0.5;
      }
      if (!accepted) return out;  // stalled: every trial step went uphill
    }
    p = next;
  }
  return out;
}

inline NewtonResult stationary_bicubic(const Bicubic<double>& f, const Vec2& seed,
                                       double grad_tol, int max_iterations = 100,
                                       double max_step_cells = 2.0) {
  const Grid& g = f.grid();
  const double max_step = max_step_cells * g.h;
  Vec2 p = detail::clamp_to_box(seed, g);
  NewtonResult out;
  for (int it = 0; it < max_iterations; ++it) {
    const auto s = f.sample(p);
    out.point = p;
    out.value = s.f;
    out.grad_norm = s.grad.norm();
    out.hessian = s.hessian;
    if (out.grad_norm <= grad_tol) {
      out.converged = true;
      return out;
    }
    Vec2 step;
    const double det = s.hessian.determinant();
    // Scale-relative degeneracy guard: potentials carry arbitrary physical
    // magnitudes, so an absolute determinant floor would be meaningless.
    if (std::abs(det) > 1e-14 * s.hessian.squaredNorm()) {
      step = -s.hessian.inverse() * s.grad;
    } else {
      step = -s.grad * (g.h / out.grad_norm);
    }
    const double len = step.norm();
    if (len > max_step) step *= max_step / len;
    p = detail::clamp_to_box(p + step, g);
  }
  return out;
}

}  // namespace iontrap
