#pragma once

// Ponderomotive pseudopotential analysis.  From the peak RF field map this
// module builds U(r) = Q^2 |E_peak|^2 / (4 m Omega^2), locates the trap
// minimum and the escape saddle, extracts secular frequencies, stability
// q-parameters and principal axes, and validates the averaged picture by
// integrating full RF-driven trajectories.

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "iontrap/geometry.hpp"
#include "iontrap/grid.hpp"
#include "iontrap/laplace.hpp"

namespace iontrap {

struct PseudoField {
  Grid grid;
  Array2d u;           // joules; zero on electrode cells (field is zero there)
  ElectrodeMask mask;  // electrode cells count as loss surfaces in basin tests
  Species species;
  DriveConfig drive;
  double d = 0.0;              // ion-electrode scale for metadata/normalization
  std::string geometry_label;  // carried into reports
  // Top of the solid substrate, copied from the dielectric map: minima below
  // it are inside the chip and are never trap candidates, and reaching it
  // counts as escape.
  std::optional<double> solid_below_y;
};

// U from the peak RF field (all non-RF electrodes at 0 during the solve):
// the time average of E^2 over a drive cycle is |E_peak|^2 / 2.
PseudoField pseudopotential_field(const FieldMap& rf_field, const ElectrodeMask& mask,
                                  const Species& species, const DriveConfig& drive,
                                  std::optional<double> solid_below_y = std::nullopt);

struct TrapDepthResult {
  double depth_ev = 0.0;
  Vec2 escape_point = Vec2::Zero();
  // True when no separating saddle exists inside the grid and the depth is
  // the level at which the minimum's basin touches the grid boundary.
  bool grid_limited = false;
};

// Depth = U(escape) - U(r_min), in eV.  Stationary points of the bicubic
// surface are found by Newton from a lattice of every 5th free node
// (duplicates merged within h/2); candidate saddles are tested in ascending
// order with a flood fill just above their level, and the first one whose
// flood connects the minimum to the grid boundary is the escape point.
TrapDepthResult trap_depth(const PseudoField& pseudo, const Vec2& r_min);

struct TrapCharacterization {
  Vec2 r_min = Vec2::Zero();                // meters
  Eigen::Matrix2d hessian;                  // total potential, J/m^2
  std::array<double, 2> secular_frequencies{};  // rad/s, ascending
  std::array<double, 2> q_params{};  // + on the stiffer RF axis, - on the other
  std::array<double, 2> principal_axes{};   // degrees from horizontal, in (-90, 90]
  double depth_ev = 0.0;
  Vec2 escape_point = Vec2::Zero();
  bool depth_grid_limited = false;
  double normalized_f = 0.0;  // filled by compare_to_reference
  double normalized_u = 0.0;
  // Comparison metadata.
  Species species;
  DriveConfig drive;
  double d = 0.0;
  std::string geometry_label;
};

// Characterizes the total potential U + Q * phi_static.  The minimum comes
// from Newton descent on the bicubic surface seeded at the grid argmin;
// secular frequencies/axes from the total Hessian eigensystem; q_i from the
// RF-only curvature via q_i = 2 sqrt 2 * omega_rf_i / Omega; depth from the
// RF-only pseudopotential.  Throws physics_error when no interior minimum
// exists or the converged point is a saddle.
TrapCharacterization characterize(const PseudoField& pseudo, const Array2d& phi_static);

// Frequency and depth ratios against a baseline characterization built with
// identical species, drive, and scale d; also writes them into `tc`.
// The frequency ratio uses the geometric mean of the two secular
// frequencies (they coincide for a pure RF null).
std::pair<double, double> compare_to_reference(TrapCharacterization& tc,
                                               const TrapCharacterization& baseline);

struct StationaryPoint {
  Vec2 r = Vec2::Zero();
  double value = 0.0;     // pseudopotential level, joules
  int positive_axes = 0;  // Hessian signature: 2 = minimum, 1 = saddle, 0 = maximum
};

// Census of the stationary points of the bicubic pseudopotential surface
// inside `region` (and outside the substrate solid): Newton from a lattice of
// every 5th free node, duplicates merged within h/2, classified by Hessian
// signature and sorted by value.  Used to verify trap topology, e.g. a single
// interior minimum with a single escape saddle above it.
std::vector<StationaryPoint> stationary_census(const PseudoField& pseudo,
                                               const BoundingBox& region);

struct Trajectory {
  std::vector<double> t;   // seconds
  std::vector<double> x, y;    // meters
  std::vector<double> vx, vy;  // meters/second
  Species species;
  DriveConfig drive;
  Vec2 initial_position = Vec2::Zero();
  Vec2 initial_velocity = Vec2::Zero();
  double dt = 0.0;
  bool escaped = false;
  double escape_time = 0.0;
};

// Integrates m r'' = Q E_rf(r) cos(Omega t) + Q E_static(r) with fixed-step
// velocity Verlet on bicubic field interpolants; phi_rf is the peak RF
// potential array.  Stops early (escaped = true) when the ion leaves the
// grid interior or hits an electrode cell.  steps_per_period must be >= 50.
Trajectory simulate_trajectory(const Array2d& phi_rf, const Array2d& phi_static,
                               const Grid& grid, const ElectrodeMask& mask,
                               const Species& species, const DriveConfig& drive,
                               const Vec2& r0, const Vec2& v0, double duration,
                               int steps_per_period = 50);

// Micromotion-to-secular amplitude ratio from the trajectory spectrum: the
// two sidebands at Omega -/+ omega_secular summed, over the secular peak,
// using the coordinate with the larger secular amplitude.  For a quadrupole
// drive this equals q/2.  Throws physics_error when no secular peak is
// resolvable (on-axis trajectory).
double micromotion_ratio(const Trajectory& traj);

}  // namespace iontrap
