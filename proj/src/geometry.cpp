#include "iontrap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "iontrap/errors.hpp"

namespace iontrap {
namespace {

// Default proportions (in units of d) used when a parameter is unset.
constexpr double kDefaultWidthFactor = 2.0;
constexpr double kDefaultGapFactor = 0.2;
constexpr double kDefaultThicknessFactor = 0.10;
constexpr double kDefaultSlabExtentFactor = 20.0;
constexpr double kDefaultCenterGapFactor = 2.0;
// Circular rods of radius 1.145 d are the standard approximation to
// hyperbolic quadrupole electrodes (suppresses the leading higher-order
// multipole).
constexpr double kDefaultRodRadiusFactor = 1.145;

std::string shape_name(const ElectrodeShape& shape) {
  if (std::holds_alternative<Disc>(shape)) return "disc";
  if (std::holds_alternative<Rectangle>(shape)) return "rectangle";
  return "half_slab";
}

std::string electrode_name(const CrossSectionGeometry& g, std::size_t i) {
  return "electrode " + std::to_string(i + 1) + " (" +
         role_to_string(g.electrodes[i].role) + " " +
         shape_name(g.electrodes[i].shape) + ")";
}

BoundingBox box_of(const HalfSlab& s) {
  BoundingBox b;
  if (s.direction == SlabDirection::kRight) {
    b.xmin = s.inner_edge_x;
    b.xmax = s.inner_edge_x + s.extent;
  } else {
    b.xmin = s.inner_edge_x - s.extent;
    b.xmax = s.inner_edge_x;
  }
  b.ymin = s.y_center - 0.5 * s.thickness;
  b.ymax = s.y_center + 0.5 * s.thickness;
  return b;
}

bool boxes_overlap(const BoundingBox& a, const BoundingBox& b) {
  return a.xmin < b.xmax && b.xmin < a.xmax && a.ymin < b.ymax && b.ymin < a.ymax;
}

bool disc_box_overlap(const Disc& d, const BoundingBox& b) {
  const double cx = std::clamp(d.center.x(), b.xmin, b.xmax);
  const double cy = std::clamp(d.center.y(), b.ymin, b.ymax);
  const double dx = d.center.x() - cx;
  const double dy = d.center.y() - cy;
  return dx * dx + dy * dy < d.radius * d.radius;
}

bool shapes_overlap(const ElectrodeShape& a, const ElectrodeShape& b) {
  const Disc* da = std::get_if<Disc>(&a);
  const Disc* db = std::get_if<Disc>(&b);
  if (da && db) {
    return (da->center - db->center).norm() < da->radius + db->radius;
  }
  if (da) return disc_box_overlap(*da, bounding_box(b));
  if (db) return disc_box_overlap(*db, bounding_box(a));
  return boxes_overlap(bounding_box(a), bounding_box(b));
}

double box_distance(const BoundingBox& b, const Vec2& p) {
  const double dx = std::max({b.xmin - p.x(), 0.0, p.x() - b.xmax});
  const double dy = std::max({b.ymin - p.y(), 0.0, p.y() - b.ymax});
  return std::hypot(dx, dy);
}

Electrode rect(double cx, double cy, double w, double h, Role role) {
  return Electrode{Rectangle{Vec2(cx, cy), w, h}, role};
}

Electrode slab(double inner_x, double yc, double t, SlabDirection dir, double extent,
               Role role) {
  return Electrode{HalfSlab{inner_x, yc, t, dir, extent}, role};
}

}  // namespace

BoundingBox bounding_box(const ElectrodeShape& shape) {
  if (const Disc* d = std::get_if<Disc>(&shape)) {
    return {d->center.x() - d->radius, d->center.x() + d->radius,
            d->center.y() - d->radius, d->center.y() + d->radius};
  }
  if (const Rectangle* r = std::get_if<Rectangle>(&shape)) {
    return {r->center.x() - 0.5 * r->width, r->center.x() + 0.5 * r->width,
            r->center.y() - 0.5 * r->height, r->center.y() + 0.5 * r->height};
  }
  return box_of(std::get<HalfSlab>(shape));
}

BoundingBox bounding_box(const std::vector<BoundingBox>& boxes) {
  BoundingBox out = boxes.front();
  for (const BoundingBox& b : boxes) {
    out.xmin = std::min(out.xmin, b.xmin);
    out.xmax = std::max(out.xmax, b.xmax);
    out.ymin = std::min(out.ymin, b.ymin);
    out.ymax = std::max(out.ymax, b.ymax);
  }
  return out;
}

bool shape_contains(const ElectrodeShape& shape, const Vec2& p) {
  if (const Disc* d = std::get_if<Disc>(&shape)) {
    return (p - d->center).squaredNorm() <= d->radius * d->radius;
  }
  const BoundingBox b = bounding_box(shape);
  return p.x() >= b.xmin && p.x() <= b.xmax && p.y() >= b.ymin && p.y() <= b.ymax;
}

double distance_to_surface(const ElectrodeShape& shape, const Vec2& p) {
  if (const Disc* d = std::get_if<Disc>(&shape)) {
    return std::max(0.0, (p - d->center).norm() - d->radius);
  }
  return box_distance(bounding_box(shape), p);
}

std::string role_to_string(const Role& role) {
  switch (role.kind) {
    case RoleKind::kRf: return "rf";
    case RoleKind::kControl: return "control " + std::to_string(role.control_index);
    case RoleKind::kGround: return "ground";
  }
  return "?";
}

int CrossSectionGeometry::control_count() const {
  int n = 0;
  for (const Electrode& e : electrodes) {
    if (e.role.kind == RoleKind::kControl) n = std::max(n, e.role.control_index + 1);
  }
  return n;
}

BoundingBox CrossSectionGeometry::bounds() const {
  std::vector<BoundingBox> boxes;
  boxes.reserve(electrodes.size());
  for (const Electrode& e : electrodes) boxes.push_back(bounding_box(e.shape));
  return bounding_box(boxes);
}

void validate_geometry(const CrossSectionGeometry& g) {
  if (!(g.d > 0.0)) throw input_error("characteristic length d must be positive");
  if (g.electrodes.size() < 2)
    throw input_error("geometry needs at least 2 electrodes, got " +
                      std::to_string(g.electrodes.size()));

  bool has_rf = false, has_other = false;
  std::set<int> control_indices;
  for (std::size_t i = 0; i < g.electrodes.size(); ++i) {
    const Electrode& e = g.electrodes[i];
    const std::string name = electrode_name(g, i);
    if (const Disc* d = std::get_if<Disc>(&e.shape)) {
      if (!(d->radius > 0.0)) throw input_error(name + ": radius must be positive");
    } else if (const Rectangle* r = std::get_if<Rectangle>(&e.shape)) {
      if (!(r->width > 0.0) || !(r->height > 0.0))
        throw input_error(name + ": width and height must be positive");
    } else {
      const HalfSlab& s = std::get<HalfSlab>(e.shape);
      if (!(s.thickness > 0.0) || !(s.extent > 0.0))
        throw input_error(name + ": thickness and extent must be positive");
      if (s.extent < 20.0 * g.d)
        throw input_error(name + ": half-slab extent " + std::to_string(s.extent) +
                          " m is below the semi-infinite stand-in minimum of 20 d");
    }
    switch (e.role.kind) {
      case RoleKind::kRf: has_rf = true; break;
      case RoleKind::kControl:
        has_other = true;
        if (e.role.control_index < 0)
          throw input_error(name + ": control index must be non-negative");
        control_indices.insert(e.role.control_index);
        break;
      case RoleKind::kGround: has_other = true; break;
    }
  }
  if (!has_rf) throw input_error("geometry has no RF electrode");
  if (!has_other) throw input_error("geometry has no non-RF electrode");

  int expected = 0;
  for (int idx : control_indices) {
    if (idx != expected) {
      std::string have = "{";
      for (int v : control_indices) have += std::to_string(v) + ",";
      have.back() = '}';
      throw input_error("control indices " + have + " are not contiguous from 0");
    }
    ++expected;
  }

  for (std::size_t i = 0; i < g.electrodes.size(); ++i) {
    for (std::size_t j = i + 1; j < g.electrodes.size(); ++j) {
      if (shapes_overlap(g.electrodes[i].shape, g.electrodes[j].shape)) {
        throw input_error(electrode_name(g, i) + " overlaps " + electrode_name(g, j));
      }
    }
  }
}

double nearest_surface_distance(const CrossSectionGeometry& g, const Vec2& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const Electrode& e : g.electrodes)
    best = std::min(best, distance_to_surface(e.shape, p));
  return best;
}

CrossSectionGeometry scale_geometry(const CrossSectionGeometry& g, double factor) {
  if (!(factor > 0.0)) throw input_error("scale factor must be positive");
  CrossSectionGeometry out = g;
  out.d = g.d * factor;
  for (Electrode& e : out.electrodes) {
    if (Disc* d = std::get_if<Disc>(&e.shape)) {
      d->center *= factor;
      d->radius *= factor;
    } else if (Rectangle* r = std::get_if<Rectangle>(&e.shape)) {
      r->center *= factor;
      r->width *= factor;
      r->height *= factor;
    } else {
      HalfSlab& s = std::get<HalfSlab>(e.shape);
      s.inner_edge_x *= factor;
      s.y_center *= factor;
      s.thickness *= factor;
      s.extent *= factor;
    }
  }
  return out;
}

namespace {

bool close(double a, double b, double rel_tol) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) <= rel_tol * scale;
}

bool shapes_equal(const ElectrodeShape& a, const ElectrodeShape& b, double rel_tol) {
  if (a.index() != b.index()) return false;
  if (const Disc* da = std::get_if<Disc>(&a)) {
    const Disc& db = std::get<Disc>(b);
    return close(da->center.x(), db.center.x(), rel_tol) &&
           close(da->center.y(), db.center.y(), rel_tol) &&
           close(da->radius, db.radius, rel_tol);
  }
  if (const Rectangle* ra = std::get_if<Rectangle>(&a)) {
    const Rectangle& rb = std::get<Rectangle>(b);
    return close(ra->center.x(), rb.center.x(), rel_tol) &&
           close(ra->center.y(), rb.center.y(), rel_tol) &&
           close(ra->width, rb.width, rel_tol) && close(ra->height, rb.height, rel_tol);
  }
  const HalfSlab& sa = std::get<HalfSlab>(a);
  const HalfSlab& sb = std::get<HalfSlab>(b);
  return close(sa.inner_edge_x, sb.inner_edge_x, rel_tol) &&
         close(sa.y_center, sb.y_center, rel_tol) &&
         close(sa.thickness, sb.thickness, rel_tol) && sa.direction == sb.direction &&
         close(sa.extent, sb.extent, rel_tol);
}

}  // namespace

bool geometries_equal(const CrossSectionGeometry& a, const CrossSectionGeometry& b,
                      double rel_tol) {
  if (a.electrodes.size() != b.electrodes.size()) return false;
  if (!close(a.d, b.d, rel_tol) || a.label != b.label) return false;
  for (std::size_t i = 0; i < a.electrodes.size(); ++i) {
    const Role& ra = a.electrodes[i].role;
    const Role& rb = b.electrodes[i].role;
    if (ra.kind != rb.kind) return false;
    if (ra.kind == RoleKind::kControl && ra.control_index != rb.control_index) return false;
    if (!shapes_equal(a.electrodes[i].shape, b.electrodes[i].shape, rel_tol)) return false;
  }
  return true;
}

GeometryKind parse_geometry_kind(const std::string& name) {
  if (name == "four-rod" || name == "four_rod") return GeometryKind::kFourRod;
  if (name == "two-layer" || name == "two_layer") return GeometryKind::kTwoLayer;
  if (name == "three-layer" || name == "three_layer") return GeometryKind::kThreeLayer;
  if (name == "four-wire" || name == "four_wire") return GeometryKind::kFourWire;
  if (name == "five-wire" || name == "five_wire") return GeometryKind::kFiveWire;
  if (name == "five-wire-in-plane" || name == "five_wire_in_plane")
    return GeometryKind::kFiveWireInPlane;
  throw input_error("unknown geometry kind '" + name + "'");
}

std::string geometry_kind_name(GeometryKind kind) {
  switch (kind) {
    case GeometryKind::kFourRod: return "four-rod";
    case GeometryKind::kTwoLayer: return "two-layer";
    case GeometryKind::kThreeLayer: return "three-layer";
    case GeometryKind::kFourWire: return "four-wire";
    case GeometryKind::kFiveWire: return "five-wire";
    case GeometryKind::kFiveWireInPlane: return "five-wire-in-plane";
  }
  return "?";
}

ResolvedParams resolve_params(GeometryKind kind, const CanonicalParams& p) {
  if (!(p.d > 0.0)) throw input_error("canonical geometry requires d > 0");
  ResolvedParams r;
  r.kind = kind;
  r.d = p.d;
  r.electrode_width = p.electrode_width.value_or(kDefaultWidthFactor * p.d);
  r.gap = p.gap.value_or(kDefaultGapFactor * p.d);
  r.thickness = p.thickness.value_or(kDefaultThicknessFactor * p.d);
  r.gamma = p.gamma.value_or(1.0);
  r.rod_radius = p.rod_radius.value_or(kDefaultRodRadiusFactor * p.d);
  r.slab_extent = p.slab_extent.value_or(kDefaultSlabExtentFactor * p.d);
  r.center_gap = p.center_gap.value_or(kDefaultCenterGapFactor * p.d);
  r.rf_width_left = p.rf_width_left.value_or(r.electrode_width);
  r.rf_width_right = p.rf_width_right.value_or(r.electrode_width);
  if (!(r.gamma > 0.0)) throw input_error("aspect ratio gamma must be positive");
  return r;
}

CrossSectionGeometry build_canonical(GeometryKind kind, const CanonicalParams& params) {
  const ResolvedParams p = resolve_params(kind, params);
  CrossSectionGeometry g;
  g.d = p.d;
  g.label = geometry_kind_name(kind);

  switch (kind) {
    case GeometryKind::kFourRod: {
      // Rods at distance d from the axis; RF pair on the x axis, grounded
      // control pair on the y axis.
      const double c = p.d + p.rod_radius;
      g.electrodes = {
          Electrode{Disc{Vec2(-c, 0.0), p.rod_radius}, Role::rf()},
          Electrode{Disc{Vec2(0.0, c), p.rod_radius}, Role::control(0)},
          Electrode{Disc{Vec2(c, 0.0), p.rod_radius}, Role::rf()},
          Electrode{Disc{Vec2(0.0, -c), p.rod_radius}, Role::control(1)},
      };
      break;
    }
    case GeometryKind::kTwoLayer: {
      // Two slotted conducting layers; the quadrupole is formed by the four
      // inner slot corners, which sit at distance d from the trap center.
      // gamma = slot width / layer separation.
      const double height = 2.0 * p.d / std::sqrt(1.0 + p.gamma * p.gamma);
      const double width = p.gamma * height;
      const double yc = 0.5 * height + 0.5 * p.thickness;
      const double x = 0.5 * width;
      const double t = p.thickness;
      const double ext = p.slab_extent;
      g.electrodes = {
          slab(-x, yc, t, SlabDirection::kLeft, ext, Role::rf()),
          slab(x, yc, t, SlabDirection::kRight, ext, Role::control(0)),
          slab(-x, -yc, t, SlabDirection::kLeft, ext, Role::control(1)),
          slab(x, -yc, t, SlabDirection::kRight, ext, Role::rf()),
      };
      break;
    }
    case GeometryKind::kThreeLayer: {
      // Middle RF layer between two grounded control layers; all slots
      // aligned at half-width d.  gamma = slot width / vertical opening.
      const double a = p.d;
      const double b = p.d / p.gamma;  // opening half-height
      const double t = p.thickness;
      if (b <= 0.5 * t)
        throw input_error("three-layer: vertical opening " + std::to_string(2.0 * b) +
                          " m does not clear electrode thickness " + std::to_string(t) +
                          " m at gamma=" + std::to_string(p.gamma));
      const double yo = b + 0.5 * t;
      const double ext = p.slab_extent;
      g.electrodes = {
          slab(-a, 0.0, t, SlabDirection::kLeft, ext, Role::rf()),
          slab(a, 0.0, t, SlabDirection::kRight, ext, Role::rf()),
          slab(-a, yo, t, SlabDirection::kLeft, ext, Role::control(0)),
          slab(a, yo, t, SlabDirection::kRight, ext, Role::control(1)),
          slab(-a, -yo, t, SlabDirection::kLeft, ext, Role::control(2)),
          slab(a, -yo, t, SlabDirection::kRight, ext, Role::control(3)),
      };
      break;
    }
    case GeometryKind::kFourWire: {
      // Coplanar strips, alternating RF / control; the trap axis sits above
      // the gap between the middle pair.
      const double w = p.electrode_width;
      const double t = p.thickness;
      const double yc = 0.5 * t;  // strips sit on the substrate plane y=0
      const double x1 = 0.5 * p.gap + 0.5 * w;
      const double x2 = 0.5 * p.gap + w + p.gap + 0.5 * w;
      g.electrodes = {
          rect(-x2, yc, w, t, Role::rf()),
          rect(-x1, yc, w, t, Role::control(0)),
          rect(x1, yc, w, t, Role::rf()),
          rect(x2, yc, w, t, Role::control(1)),
      };
      break;
    }
    case GeometryKind::kFiveWire: {
      // Ground / RF / ground / RF / ground strips; the trap axis sits above
      // the center electrode.  The grounded electrodes are modeled as
      // indexed controls so static potentials can be applied to them.
      const double wc = p.electrode_width;
      const double wo = p.electrode_width;
      const double t = p.thickness;
      const double yc = 0.5 * t;
      const double gl = p.gap;
      const double xl_rf = -(0.5 * wc + gl + 0.5 * p.rf_width_left);
      const double xr_rf = 0.5 * wc + gl + 0.5 * p.rf_width_right;
      const double xl_out = -(0.5 * wc + gl + p.rf_width_left + gl + 0.5 * wo);
      const double xr_out = 0.5 * wc + gl + p.rf_width_right + gl + 0.5 * wo;
      g.electrodes = {
          rect(xl_out, yc, wo, t, Role::control(1)),
          rect(xl_rf, yc, p.rf_width_left, t, Role::rf()),
          rect(0.0, yc, wc, t, Role::control(0)),
          rect(xr_rf, yc, p.rf_width_right, t, Role::rf()),
          rect(xr_out, yc, wo, t, Role::control(2)),
      };
      break;
    }
    case GeometryKind::kFiveWireInPlane: {
      // Two RF rails flanked by grounds, with the trapping minimum in the
      // electrode plane at the center of the central gap (half-width d).
      const double w = p.electrode_width;
      const double t = p.thickness;
      const double c = 0.5 * p.center_gap;
      const double x_rf = c + 0.5 * w;
      const double x_gnd = c + w + p.gap + 0.5 * w;
      g.electrodes = {
          rect(-x_gnd, 0.0, w, t, Role::ground()),
          rect(-x_rf, 0.0, w, t, Role::rf()),
          rect(x_rf, 0.0, w, t, Role::rf()),
          rect(x_gnd, 0.0, w, t, Role::ground()),
      };
      break;
    }
  }

  validate_geometry(g);
  return g;
}

}  // namespace iontrap
