#pragma once

// Closed-form line-charge models used as oracles for the field solver.
//
// A set of signed line charges (strength normalized so lambda / 2 pi eps0 = 1
// for a unit charge) has complex potential
//   w(z) = sum_k  -lambda_k * ln(z - z_k),
// with the transverse field recovered from dw/dz = -Ex + i Ey.  The squared
// field magnitude
//   Upsilon(z) = |dw/dz|^2
// is proportional to the ponderomotive pseudopotential, so its zeros are trap
// axes, its local maxima set the trap depth, and its curvature at a zero sets
// the secular frequency.  Everything here is exact arithmetic on rational
// functions plus Newton searches with analytic derivatives; no grids.

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "iontrap/geometry.hpp"

namespace iontrap {

using Complex = std::complex<double>;

struct LineCharge {
  Complex position;   // model length units
  double strength;    // signed, dimensionless (lambda / 2 pi eps0)
};

struct LineChargeSystem {
  std::vector<LineCharge> charges;
  std::string label;
};

// Ideal quadrupole: +1 at z = +/-1, -1 at z = +/-i.
LineChargeSystem quadrupole_line_charges();

// Surface-electrode analogue: four collinear charges on the real axis,
// +1 at -1/2 and +3/2, -1 at -3/2 and +1/2; traps above/below the axis.
LineChargeSystem four_wire_surface_line_charges();

// Complex potential and complex field E = Ex + i Ey at z.  Throws
// input_error when z coincides with a charge position.
struct PotentialFieldSample {
  Complex w;  // complex potential
  Complex e;  // Ex + i Ey
};
PotentialFieldSample complex_potential_and_field(const LineChargeSystem& sys, Complex z);

// Upsilon = |dw/dz|^2 and its exact derivatives in (x, y).
double upsilon(const LineChargeSystem& sys, Complex z);
Vec2 upsilon_gradient(const LineChargeSystem& sys, Complex z);
Eigen::Matrix2d upsilon_hessian(const LineChargeSystem& sys, Complex z);

// Stationary points of Upsilon from a damped Newton search seeded on a
// lattice over [-half_box, half_box]^2; duplicates merged within merge_radius.
//
// Upsilon = |f|^2 with analytic f is subharmonic, so it has no strict 2D
// interior maxima: every stationary point is either a field null (a true
// minimum, Upsilon = 0) or a saddle where f' = 0.  Escape barriers are the
// saddles, which are maxima along the escape direction only.
enum class StationaryKind { kMinimum, kSaddle, kMaximum };

struct AnalyticStationaryPoint {
  Complex z;
  double upsilon = 0.0;
  double grad_norm = 0.0;
  StationaryKind kind = StationaryKind::kMinimum;
};

struct StationarySearchOptions {
  double half_box = 3.0;
  int lattice_n = 31;          // seeds per axis
  double merge_radius = 1e-6;
  double grad_tol = 1e-13;
  int max_iterations = 120;
};

std::vector<AnalyticStationaryPoint> stationary_points(const LineChargeSystem& sys,
                                               const StationarySearchOptions& options = {});

// Summary of a line-charge trap: where it traps, how stiff, how deep.
// For the ideal references the quadrupole comparison assumes equal line
// charge densities; finite_conductor_fit instead normalizes to equal
// conductor voltage through the matched surface levels.
struct AnalyticTrapResult {
  std::vector<Complex> minima;  // field nulls (trap axes)
  std::vector<Complex> maxima;  // escape points: lowest-Upsilon non-null stationary points
  double curvature_at_min = 0.0;    // d^2 Upsilon / dx^2 at a null
  double upsilon_at_max = 0.0;
  double frequency_ratio_vs_quadrupole = 1.0;
  double depth_ratio_vs_quadrupole = 1.0;
};

// Exact constants for the ideal quadrupole: null at 0 with curvature 32,
// four escape maxima at (+/-1 +/- i)/sqrt(2 sqrt 3) where Upsilon = 3 sqrt 3.
AnalyticTrapResult reference_quadrupole();

// Exact constants for the ideal four-wire surface system: nulls at
// (0, +/- sqrt(3)/2) with curvature 8/3 (1/12 of the quadrupole's), escape
// maxima at (0, +/- sqrt(3 + 4 sqrt 3)/2) where Upsilon = 1/(7 + 4 sqrt 3),
// frequency ratio 1/(2 sqrt 3), depth ratio 1/(3 (12 + 7 sqrt 3)).
AnalyticTrapResult reference_four_wire_surface();

// Finite-diameter conductor correction.  Replaces the pure line charges by
// conductors of the given diameter (same length units) and rescales the
// inner group's charge until every wire's equipotential contour, at the one
// level whose contour mean diameter (16 radial samples) matches the target
// on the outer wires, has that same mean diameter.  The corrected system is
// then re-characterized; frequency and depth ratios keep unit line charge on
// the outer wires, so the finite-diameter correction enters only through the
// fitted charge ratio.  The matched contour levels are reported alongside.
struct WireContour {
  Complex center;
  double mean_diameter = 0.0;
  double horizontal_diameter = 0.0;
  double vertical_diameter = 0.0;
  double min_radius = 0.0;
  double max_radius = 0.0;
};

struct FiniteConductorFit {
  double charge_ratio = 1.0;      // inner / outer charge magnitude
  double wire_diameter = 0.0;     // as requested, model units
  double circularity = 0.0;       // worst max/min contour radius - 1
  double surface_level = 0.0;     // |potential| on the fitted wire contours
  double quadrupole_level = 0.0;  // same-diameter level for the quadrupole
  std::vector<WireContour> wires;
  AnalyticTrapResult result;
  std::string note;               // records the level-matching convention
};

FiniteConductorFit finite_conductor_fit(const LineChargeSystem& sys, double wire_diameter);

}  // namespace iontrap
