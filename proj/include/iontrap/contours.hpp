#pragma once

// Isoline extraction for potential and pseudopotential maps.  Produces the
// capped-contour rendering used for cross-section plots: geometrically spaced
// levels between the field minimum and a cap, traced with marching squares
// and chained into polylines.

#include <string>
#include <vector>

#include "iontrap/grid.hpp"
#include "iontrap/laplace.hpp"

namespace iontrap {

struct ContourPolyline {
  double level = 0.0;
  std::vector<Vec2> points;  // ordered vertices; closed curves repeat nothing
  bool closed = false;
};

// n levels spaced geometrically from lo to cap (both included for n >= 2).
// A nonpositive lo (pseudopotential minima are numerically zero) is floored
// at cap * 1e-4.  Requires cap > 0, cap > lo, and n >= 1.
std::vector<double> geometric_levels(double lo, double cap, int n);

// Marching-squares isolines of a node-centered field.  Crossing points are
// interpolated linearly along cell edges and chained into polylines; the two
// ambiguous saddle cases are split using the cell-center average.  Cells with
// any corner inside an electrode are skipped when a mask is given, so traces
// stop at conductor surfaces instead of cutting through them.
std::vector<ContourPolyline> extract_contours(const Array2d& field, const Grid& grid,
                                              const std::vector<double>& levels,
                                              const ElectrodeMask* mask = nullptr);

// CSV of (x, y, value) triplets, one row per vertex; polylines are separated
// by blank rows and closed ones repeat their first vertex at the end.
std::string contours_csv(const std::vector<ContourPolyline>& lines);

}  // namespace iontrap
