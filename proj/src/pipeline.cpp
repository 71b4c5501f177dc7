#include "iontrap/pipeline.hpp"

#include <cmath>
#include <utility>

#include "iontrap/errors.hpp"
#include "iontrap/interp.hpp"

namespace iontrap {
namespace {

bool has_nonzero_static(const CrossSectionGeometry& g, const StaticConfig& statics) {
  for (const Electrode& e : g.electrodes) {
    if (e.role.kind == RoleKind::kControl && statics.voltage(e.role.control_index) != 0.0)
      return true;
  }
  return false;
}

// One full solve + characterization pass at a fixed electrode scale.
AnalysisResult run_pass(const CrossSectionGeometry& g, const Species& species,
                        const DriveConfig& drive, const AnalysisOptions& options) {
  AnalysisResult r;
  r.geometry = g;
  const double h = g.d / options.cells_per_d;
  r.grid = make_grid(g, h, options.margin_factor);
  r.mask = rasterize_electrodes(g, r.grid);
  const DielectricMap eps = make_vacuum();

  r.phi_rf = solve_pattern(g, r.grid, eps, electrode_voltages(g, drive.v0), options.solver,
                           &r.rf_stats);
  if (has_nonzero_static(g, options.statics)) {
    r.phi_static = solve_pattern(g, r.grid, eps, electrode_voltages(g, 0.0, options.statics),
                                 options.solver, &r.static_stats);
  } else {
    r.phi_static = Array2d::Zero(r.grid.nx, r.grid.ny);
    r.static_stats.converged = true;
  }

  const FieldMap rf_field = field_of(r.phi_rf, r.grid, r.mask);
  r.pseudo = pseudopotential_field(rf_field, r.mask, species, drive, options.chip_floor_y);
  r.pseudo.d = g.d;
  r.pseudo.geometry_label = g.label;
  r.tc = characterize(r.pseudo, r.phi_static);
  r.axis_distance = nearest_surface_distance(g, r.tc.r_min);
  return r;
}

}  // namespace

AnalysisResult analyze_geometry(const CrossSectionGeometry& g, const Species& species,
                                const DriveConfig& drive, const AnalysisOptions& options) {
  if (!(options.cells_per_d >= 4.0))
    throw input_error("analysis needs at least 4 grid cells per d");
  if (options.calibrate_distance && !(options.calibrate_rel_tol > 0.0))
    throw input_error("calibration tolerance must be positive");

  double scale = 1.0;
  const int passes = options.calibrate_distance ? options.calibrate_max_iterations : 1;
  AnalysisResult r;
  for (int pass = 1; ; ++pass) {
    CrossSectionGeometry cur = g;
    if (scale != 1.0) {
      cur = scale_geometry(g, scale);
      cur.d = g.d;  // the declared distance is the calibration target, not a size
    }
    AnalysisOptions pass_options = options;
    // Keep electrode features resolved as the layout shrinks or grows.
    pass_options.cells_per_d = options.cells_per_d / scale;
    r = run_pass(cur, species, drive, pass_options);
    r.scale = scale;
    r.calibration_iterations = pass;
    if (!options.calibrate_distance ||
        std::abs(r.axis_distance - g.d) <= options.calibrate_rel_tol * g.d || pass >= passes) {
      return r;
    }
    scale *= g.d / r.axis_distance;
  }
}

AnalysisOptions canonical_options(GeometryKind kind) {
  AnalysisOptions options;
  if (kind == GeometryKind::kFourWire || kind == GeometryKind::kFiveWire)
    options.chip_floor_y = 0.0;
  return options;
}

AnalysisResult analyze_canonical(GeometryKind kind, const CanonicalParams& params,
                                 const Species& species, const DriveConfig& drive,
                                 const AnalysisOptions* options) {
  const CrossSectionGeometry g = build_canonical(kind, params);
  return analyze_geometry(g, species, drive, options ? *options : canonical_options(kind));
}

std::vector<LayoutComparisonRow> layout_comparison_table(double d, const Species& species,
                                                         const DriveConfig& drive,
                                                         double three_layer_gamma) {
  const GeometryKind kinds[] = {GeometryKind::kFourRod,  GeometryKind::kTwoLayer,
                                GeometryKind::kThreeLayer, GeometryKind::kFourWire,
                                GeometryKind::kFiveWire,  GeometryKind::kFiveWireInPlane};
  std::vector<LayoutComparisonRow> rows;
  rows.reserve(std::size(kinds));
  for (GeometryKind kind : kinds) {
    CanonicalParams params;
    params.d = d;
    if (kind == GeometryKind::kThreeLayer) params.gamma = three_layer_gamma;
    AnalysisOptions options = canonical_options(kind);
    // Comparing layouts is only meaningful at a common ion-to-electrode
    // distance; the coplanar strip layouts trap well above their construction
    // scale and need the calibration loop to hold that distance at d.
    if (kind == GeometryKind::kFourWire || kind == GeometryKind::kFiveWire)
      options.calibrate_distance = true;
    AnalysisResult result = analyze_canonical(kind, params, species, drive, &options);
    LayoutComparisonRow row;
    row.kind = kind;
    row.gamma = kind == GeometryKind::kThreeLayer ? three_layer_gamma : 1.0;
    row.scale = result.scale;
    row.axis_distance = result.axis_distance;
    row.tc = std::move(result.tc);
    rows.push_back(std::move(row));
  }
  TrapCharacterization& baseline = rows[1].tc;
  for (LayoutComparisonRow& row : rows) compare_to_reference(row.tc, baseline);
  return rows;
}

std::array<double, 2> control_axis_angles(const AnalysisResult& r) {
  int controls = 0;
  for (const Electrode& e : r.geometry.electrodes)
    if (e.role.kind == RoleKind::kControl) ++controls;
  if (controls == 0)
    throw input_error("axis angles need at least one control electrode");

  StaticConfig unit;
  for (const Electrode& e : r.geometry.electrodes)
    if (e.role.kind == RoleKind::kControl) unit.control_voltages[e.role.control_index] = 1.0;
  const Array2d phi = solve_pattern(r.geometry, r.grid, make_vacuum(),
                                    electrode_voltages(r.geometry, 0.0, unit),
                                    SolverOptions{});
  const Bicubic<double> interp(r.grid, phi);
  const Eigen::Matrix2d hess = interp.sample(r.tc.r_min).hessian;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(hess);

  std::array<double, 2> angles{};
  for (int k = 0; k < 2; ++k) {
    const Eigen::Vector2d v = eig.eigenvectors().col(k);
    double deg = std::atan2(v.y(), v.x()) * 180.0 / 3.14159265358979323846;
    if (deg <= -90.0) deg += 180.0;
    if (deg > 90.0) deg -= 180.0;
    angles[k] = deg;
  }
  if (angles[0] > angles[1]) std::swap(angles[0], angles[1]);
  return angles;
}

}  // namespace iontrap
