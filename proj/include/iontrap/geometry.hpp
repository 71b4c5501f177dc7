#pragma once

// 2D electrode cross-sections for linear RF trap designs.
//
// A geometry is an ordered list of electrodes (disc / rectangle / half-slab
// shapes with an RF, indexed-control, or ground role) plus the characteristic
// length d: the distance from the intended trap axis to the nearest electrode
// surface.  Canonical builders cover the standard layouts: the four-rod
// quadrupole, its two-layer slotted-wafer implementation, the three-layer
// stack, and the four-wire / five-wire / in-plane surface designs.
//
// All values are SI (meters).  Geometries are immutable after construction
// and safe to share across threads.

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace iontrap {

using Vec2 = Eigen::Vector2d;

// --- Shapes -----------------------------------------------------------------

struct Disc {
  Vec2 center{0.0, 0.0};
  double radius = 0.0;
};

struct Rectangle {
  Vec2 center{0.0, 0.0};
  double width = 0.0;   // x extent
  double height = 0.0;  // y extent
};

// Stand-in for a semi-infinite electrode: a slab starting at inner_edge_x and
// extending `extent` to the left or right.  `extent` must be at least 20x the
// geometry's characteristic length so that the truncation error at the trap
// center is below solver tolerance.
enum class SlabDirection { kLeft, kRight };

struct HalfSlab {
  double inner_edge_x = 0.0;
  double y_center = 0.0;
  double thickness = 0.0;
  SlabDirection direction = SlabDirection::kRight;
  double extent = 0.0;
};

using ElectrodeShape = std::variant<Disc, Rectangle, HalfSlab>;

// Axis-aligned bounding box; half-slabs are exactly their box.
struct BoundingBox {
  double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
};

BoundingBox bounding_box(const ElectrodeShape& shape);
BoundingBox bounding_box(const std::vector<BoundingBox>& boxes);

bool shape_contains(const ElectrodeShape& shape, const Vec2& p);

// Euclidean distance from p to the electrode surface; 0 if p lies inside.
double distance_to_surface(const ElectrodeShape& shape, const Vec2& p);

// --- Electrodes and geometries ----------------------------------------------

enum class RoleKind { kRf, kControl, kGround };

struct Role {
  RoleKind kind = RoleKind::kGround;
  int control_index = -1;  // valid only for kControl

  static Role rf() { return {RoleKind::kRf, -1}; }
  static Role control(int index) { return {RoleKind::kControl, index}; }
  static Role ground() { return {RoleKind::kGround, -1}; }
};

std::string role_to_string(const Role& role);

struct Electrode {
  ElectrodeShape shape;
  Role role;
};

struct CrossSectionGeometry {
  std::vector<Electrode> electrodes;
  double d = 0.0;  // axis-to-nearest-surface distance [m]
  std::string label;

  int control_count() const;
  BoundingBox bounds() const;
};

// Throws input_error with a diagnostic naming the offending electrode(s) if
// any invariant is violated (non-positive dimension, overlapping pair,
// non-contiguous control indices, missing RF / non-RF electrode, ...).
void validate_geometry(const CrossSectionGeometry& g);

// Distance from p to the nearest electrode surface over the whole geometry.
double nearest_surface_distance(const CrossSectionGeometry& g, const Vec2& p);

// Uniform rescale of every coordinate and dimension (and d) by `factor`.
CrossSectionGeometry scale_geometry(const CrossSectionGeometry& g, double factor);

// Semantic equality within a relative tolerance (used by round-trip tests).
bool geometries_equal(const CrossSectionGeometry& a, const CrossSectionGeometry& b,
                      double rel_tol = 1e-12);

// --- Drive / static / species records ----------------------------------------

struct DriveConfig {
  double v0 = 0.0;     // peak RF amplitude [V]
  double omega = 0.0;  // drive angular frequency [rad/s]
};

struct StaticConfig {
  std::map<int, double> control_voltages;  // control index -> volts

  // Voltage for an index, defaulting to 0 V.
  double voltage(int index) const {
    auto it = control_voltages.find(index);
    return it == control_voltages.end() ? 0.0 : it->second;
  }
};

struct Species {
  double mass = 0.0;    // kg
  double charge = 0.0;  // C (nonzero; sign respected)
};

// --- Canonical builders -------------------------------------------------------

enum class GeometryKind {
  kFourRod,
  kTwoLayer,
  kThreeLayer,
  kFourWire,
  kFiveWire,
  kFiveWireInPlane
};

GeometryKind parse_geometry_kind(const std::string& name);
std::string geometry_kind_name(GeometryKind kind);

// Parameter record for build_canonical.  Unset optionals resolve to the
// documented defaults (in units of d): electrode widths 2d, gaps 0.2d,
// thickness 0.10d, semi-infinite slab extent 20d, four-rod rod radius
// 1.145d, in-plane central gap 2d, aspect ratio 1.
struct CanonicalParams {
  double d = 0.0;
  std::optional<double> electrode_width;
  std::optional<double> gap;
  std::optional<double> thickness;
  std::optional<double> gamma;
  std::optional<double> rod_radius;
  std::optional<double> slab_extent;
  std::optional<double> center_gap;
  // Per-rail width overrides for the five-wire layout (principal-axis
  // rotation studies); default to electrode_width.
  std::optional<double> rf_width_left;
  std::optional<double> rf_width_right;
};

// The same record with every default filled in, for run manifests.
struct ResolvedParams {
  GeometryKind kind = GeometryKind::kFiveWire;
  double d = 0.0;
  double electrode_width = 0.0;
  double gap = 0.0;
  double thickness = 0.0;
  double gamma = 1.0;
  double rod_radius = 0.0;
  double slab_extent = 0.0;
  double center_gap = 0.0;
  double rf_width_left = 0.0;
  double rf_width_right = 0.0;
};

ResolvedParams resolve_params(GeometryKind kind, const CanonicalParams& params);

// Builds and validates one of the canonical cross-sections.
//
// Electrode roles follow the standard assignments: four-rod alternates
// RF/control around the axis; the two-layer slotted pair drives one diagonal
// at RF; the three-layer stack drives the middle layer at RF with four outer
// controls; four-wire alternates RF, control, RF, control; five-wire grounds
// the center and outer electrodes (as indexed controls) with two RF rails;
// the in-plane variant flanks two RF rails with ground electrodes.
CrossSectionGeometry build_canonical(GeometryKind kind, const CanonicalParams& params);

}  // namespace iontrap
