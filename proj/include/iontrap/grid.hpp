#pragma once

// Uniform 2D node-centered grid shared by the field solver, interpolation,
// and export code.  Node (i, j) sits at origin + (i*h, j*h); arrays are
// Eigen 2D arrays indexed (i, j) = (x index, y index), so x runs contiguous
// in memory (column-major with nx rows).

#include <Eigen/Dense>
#include <cmath>

#include "iontrap/errors.hpp"
#include "iontrap/geometry.hpp"

namespace iontrap {

template <typename Scalar>
using Array2 = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Array2d = Array2<double>;

struct Grid {
  int nx = 0, ny = 0;   // node counts, >= 16 each
  double h = 0.0;       // uniform spacing [m]
  Vec2 origin{0.0, 0.0};

  double x(int i) const { return origin.x() + i * h; }
  double y(int j) const { return origin.y() + j * h; }
  Vec2 point(int i, int j) const { return Vec2(x(i), y(j)); }
  double xmax() const { return x(nx - 1); }
  double ymax() const { return y(ny - 1); }

  bool contains(const Vec2& p) const {
    return p.x() >= origin.x() && p.x() <= xmax() && p.y() >= origin.y() && p.y() <= ymax();
  }

  // Continuous (fractional-index) coordinates of a point.
  double fx(const Vec2& p) const { return (p.x() - origin.x()) / h; }
  double fy(const Vec2& p) const { return (p.y() - origin.y()) / h; }

  // Nearest node indices, clamped into range.
  int nearest_i(double px) const {
    const int i = static_cast<int>(std::lround((px - origin.x()) / h));
    return i < 0 ? 0 : (i >= nx ? nx - 1 : i);
  }
  int nearest_j(double py) const {
    const int j = static_cast<int>(std::lround((py - origin.y()) / h));
    return j < 0 ? 0 : (j >= ny ? ny - 1 : j);
  }
};

// Builds a grid covering the geometry's electrodes with the given margin on
// every side (default 8 d, the minimum the solver accepts).  When the
// electrode layout is mirror symmetric about x = 0, the grid is centered so
// that x = 0 falls exactly on a node column, keeping discrete solutions
// symmetric too.
inline Grid make_grid(const CrossSectionGeometry& g, double h, double margin_factor = 8.0) {
  if (!(h > 0.0)) throw input_error("grid spacing must be positive");
  if (!(margin_factor >= 8.0))
    throw input_error("grid margin must be at least 8 d");
  const BoundingBox box = g.bounds();
  const double margin = margin_factor * g.d;
  Grid grid;
  grid.h = h;

  const double span_y = (box.ymax + margin) - (box.ymin - margin);
  const bool symmetric_x = std::abs(box.xmin + box.xmax) < 1e-9 * (box.xmax - box.xmin + margin);
  if (symmetric_x) {
    const int half = static_cast<int>(std::ceil((box.xmax + margin) / h));
    grid.nx = 2 * half + 1;
    grid.origin.x() = -half * h;
  } else {
    grid.nx = static_cast<int>(std::ceil(((box.xmax + margin) - (box.xmin - margin)) / h)) + 1;
    grid.origin.x() = box.xmin - margin;
  }
  const bool symmetric_y = std::abs(box.ymin + box.ymax) < 1e-9 * (box.ymax - box.ymin + margin);
  if (symmetric_y) {
    const int half = static_cast<int>(std::ceil((box.ymax + margin) / h));
    grid.ny = 2 * half + 1;
    grid.origin.y() = -half * h;
  } else {
    grid.ny = static_cast<int>(std::ceil(span_y / h)) + 1;
    grid.origin.y() = box.ymin - margin;
  }
  if (grid.nx < 16 || grid.ny < 16)
    throw input_error("grid too small: nx and ny must be at least 16");
  return grid;
}

}  // namespace iontrap
