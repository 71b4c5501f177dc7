#pragma once

// One-call orchestration of the standard analysis chain: grid sizing, the RF
// and control-pattern Laplace solves, pseudopotential assembly, and trap
// characterization.  Also provides the axis-distance calibration loop used
// when layouts must be compared at a common ion-to-electrode distance, the
// cross-layout comparison table normalized to the two-layer baseline, and the
// principal-axis angles of the control (static) potential.

#include <array>
#include <optional>
#include <vector>

#include "iontrap/geometry.hpp"
#include "iontrap/grid.hpp"
#include "iontrap/laplace.hpp"
#include "iontrap/pseudo.hpp"

namespace iontrap {

struct AnalysisOptions {
  // Grid spacing is scale * d / cells_per_d, so electrode features stay
  // resolved when the calibration loop rescales the layout.
  double cells_per_d = 40.0;
  double margin_factor = 8.0;  // grid margin in units of d (>= 8)
  SolverOptions solver;
  StaticConfig statics;  // control voltages; all 0 V skips the static solve
  // Chip surface level for strip-on-substrate layouts.  The field solve stays
  // a vacuum solve; the floor only marks y below it as ion loss, which pins
  // the reported well to the one above the chip (the mirror well below the
  // strip plane of a coplanar layout is inside the substrate).
  std::optional<double> chip_floor_y;
  // Iteratively rescales the electrodes (d held fixed) until the
  // pseudopotential minimum sits at distance d from the nearest electrode
  // surface.  Layouts whose construction already guarantees that distance
  // converge on the first pass.
  bool calibrate_distance = false;
  double calibrate_rel_tol = 2e-3;
  int calibrate_max_iterations = 8;
};

struct AnalysisResult {
  CrossSectionGeometry geometry;  // as analyzed (post-calibration sizes)
  double scale = 1.0;             // cumulative electrode rescale factor
  int calibration_iterations = 1; // analysis passes performed
  double axis_distance = 0.0;     // minimum-to-nearest-surface distance [m]
  Grid grid;
  ElectrodeMask mask;
  Array2d phi_rf;      // peak RF potential at the drive amplitude [V]
  Array2d phi_static;  // control potential at the static voltages [V]
  SolveStats rf_stats;
  SolveStats static_stats;
  PseudoField pseudo;
  TrapCharacterization tc;
};

// Runs the chain on one geometry.  Throws input_error for bad settings and
// propagates physics_error when no trap minimum exists.
AnalysisResult analyze_geometry(const CrossSectionGeometry& g, const Species& species,
                                const DriveConfig& drive, const AnalysisOptions& options = {});

// Per-layout defaults: the coplanar strip layouts (four- and five-wire) get
// the chip floor at y = 0; everything else runs with plain defaults.
AnalysisOptions canonical_options(GeometryKind kind);

// build_canonical + canonical_options + analyze_geometry.  When `options` is
// supplied it is used verbatim instead of the canonical defaults.
AnalysisResult analyze_canonical(GeometryKind kind, const CanonicalParams& params,
                                 const Species& species, const DriveConfig& drive,
                                 const AnalysisOptions* options = nullptr);

// One row of the cross-layout comparison: a characterization normalized
// against the two-layer baseline via compare_to_reference.
struct LayoutComparisonRow {
  GeometryKind kind = GeometryKind::kTwoLayer;
  double gamma = 1.0;          // aspect ratio used (layered rows)
  double scale = 1.0;          // calibration rescale applied to the layout
  double axis_distance = 0.0;  // measured minimum-to-surface distance [m]
  TrapCharacterization tc;     // normalized_f / normalized_u filled in
};

// Characterizes the canonical layouts with default widths at a common d,
// species, and drive: four-rod, two-layer (gamma 1), three-layer (gamma as
// given), four-wire, five-wire, and in-plane five-wire, in that order.
// Frequencies and depths are normalized to the two-layer row.  The coplanar
// strip layouts are distance-calibrated so every row traps its ion at the
// same distance d from the nearest electrode; `scale` records the electrode
// rescale this required.
std::vector<LayoutComparisonRow> layout_comparison_table(double d, const Species& species,
                                                         const DriveConfig& drive,
                                                         double three_layer_gamma = 1.8);

// Orientation of the two transverse principal axes, in degrees from
// horizontal, each mapped to (-90, 90] and returned in ascending order.
// The static potential sets these directions (the pseudopotential is nearly
// isotropic at the RF null), so they are computed from the Hessian of the
// every-control-at-1-V pattern at the trap minimum; the directions are
// insensitive to the actual control amplitudes over a wide range.
std::array<double, 2> control_axis_angles(const AnalysisResult& r);

}  // namespace iontrap
