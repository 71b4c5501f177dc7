#pragma once

// Miniaturization scaling laws for an RF quadrupole trap operated at a fixed
// Mathieu parameter q_i and a fixed breakdown-limited surface field E0.
// Under those two constraints every trap property becomes a power law in the
// electrode scale R: the drive amplitude grows as V0 = E0*R, the drive
// frequency as R^-1/2, the secular frequency as R^-1/2, the well depth as R,
// and the depth measured in motional quanta as R^(3/2).  The classifier at
// the bottom sorts a trap size into the surface-noise heating regimes
// (exponent of the heating-rate-vs-distance power law).

#include <optional>
#include <string>
#include <vector>

#include "iontrap/geometry.hpp"

namespace iontrap {

// Everything about a trap design that is independent of its physical size.
struct ScalingScenario {
  Species species;   // trapped ion (mass > 0, charge != 0)
  double q_i = 0.0;  // Mathieu stability parameter, 0 < q_i < 0.9
  double e0 = 0.0;   // peak surface field the electrodes sustain [V/m]
  double beta = 1.0; // geometric well-depth efficiency, 0 < beta <= 1
};

// The scenario's worked reference point: a beryllium ion in a trap whose
// geometry factor and stability parameter match the surface-electrode
// designs studied by the rest of this library.
ScalingScenario beryllium_scenario();

// All quantities the scaling laws fix once a size R is chosen.
struct ScalingPoint {
  double radius = 0.0;        // electrode scale R [m]
  double v0 = 0.0;            // drive amplitude E0*R [V]
  double omega_drive = 0.0;   // drive angular frequency [rad/s]
  double u_max = 0.0;         // well depth [J]
  double u_max_ev = 0.0;      // well depth [eV]
  double omega_secular = 0.0; // secular angular frequency [rad/s]
  double quantum_ratio = 0.0; // u_max / (hbar * omega_secular)
};

// Evaluates the fixed-q, fixed-E0 scaling laws at size R (> 0):
//   V0      = E0 * R
//   Omega   = sqrt(2 Q V0 / (m q_i R^2))
//   U_max   = beta q_i Q E0 R / 8
//   omega_i = (1/2) sqrt(q_i Q E0 / (m R))
//   U_max / (hbar omega_i) = (beta / 4 hbar) sqrt(q_i Q m E0) R^(3/2)
// Throws input_error when the scenario invariants or R > 0 fail.
ScalingPoint evaluate(const ScalingScenario& s, double radius);

// Smallest trap radius whose well depth reaches `target` motional quanta
// (target >= 1): the closed-form inverse of the R^(3/2) law,
//   R = (4 hbar target / (beta sqrt(q_i Q m E0)))^(2/3).
double min_radius_for_ratio(const ScalingScenario& s, double target);

// One row of a size/field scan.
struct ScalingScanRow {
  double e0 = 0.0;    // surface field used for this row [V/m]
  ScalingPoint point; // scaling laws evaluated at (e0, point.radius)
};

// Evaluates the scenario over the cross product of fields and radii, one row
// per (E0, R) pair with rows grouped by E0.  Radii must be positive and
// strictly increasing; fields must be positive.
std::vector<ScalingScanRow> scan(const ScalingScenario& s,
                                 const std::vector<double>& radii,
                                 const std::vector<double>& e0_values);

// CSV rendering of a scan (header line + one data row per scan row).
std::string scan_csv(const std::vector<ScalingScanRow>& rows);

// Versioned JSON document holding the built-in scenario presets.
std::string scenario_presets_json();

// Distance-scaling regime of electric-field-noise heating for an ion a
// distance d above conducting electrodes.  The heating rate goes as
// d^exponent; inside the thermal-noise crossover region (d within a factor
// of ten of the skin depth, no sub-d patches) the law transitions between
// the two bounding exponents and the result is flagged transitional.
struct HeatingRegime {
  int exponent = 0;         // power-law exponent (steepest bound if transitional)
  int exponent_far = 0;     // equals `exponent` except in the transitional band
  bool transitional = false;
  std::string label;        // "patch-potential", "near-field", "far-field",
                            // or "transitional"
};

// Classifies the regime.  Fluctuating patch potentials smaller than d give
// d^-4 regardless of skin depth; otherwise d below a tenth of the skin depth
// gives d^-3, d above ten skin depths gives d^-2, and the band between is
// transitional bounded by those two exponents.  The factor-of-ten cutoffs
// are this library's convention (the regime limits are asymptotic); the
// `transitional` flag marks every point where the convention, not the
// asymptotics, decided.  The skin depth is caller-supplied at the drive
// frequency of interest.  All lengths must be positive.
HeatingRegime heating_exponent(double d, double skin_depth,
                               std::optional<double> patch_size = std::nullopt);

}  // namespace iontrap
