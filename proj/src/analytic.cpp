#include "iontrap/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "iontrap/constants.hpp"
#include "iontrap/errors.hpp"

namespace iontrap {
namespace {

// dw/dz and its first two derivatives; everything else derives from these.
Complex field_derivative(const LineChargeSystem& sys, Complex z) {
  Complex f = 0.0;
  for (const LineCharge& c : sys.charges) f -= c.strength / (z - c.position);
  return f;
}

Complex field_derivative2(const LineChargeSystem& sys, Complex z) {
  Complex g = 0.0;
  for (const LineCharge& c : sys.charges) {
    const Complex d = z - c.position;
    g += c.strength / (d * d);
  }
  return g;
}

Complex field_derivative3(const LineChargeSystem& sys, Complex z) {
  Complex h = 0.0;
  for (const LineCharge& c : sys.charges) {
    const Complex d = z - c.position;
    h -= 2.0 * c.strength / (d * d * d);
  }
  return h;
}

void check_off_charges(const LineChargeSystem& sys, Complex z) {
  for (const LineCharge& c : sys.charges) {
    if (std::abs(z - c.position) == 0.0)
      throw input_error("evaluation point coincides with a line charge");
  }
}

double min_charge_separation(const LineChargeSystem& sys) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < sys.charges.size(); ++a)
    for (std::size_t b = a + 1; b < sys.charges.size(); ++b)
      best = std::min(best, std::abs(sys.charges[a].position - sys.charges[b].position));
  return best;
}

double distance_to_charges(const LineChargeSystem& sys, Complex z) {
  double best = std::numeric_limits<double>::infinity();
  for (const LineCharge& c : sys.charges) best = std::min(best, std::abs(z - c.position));
  return best;
}

// Signed surface potential around wire k: positive and increasing toward the
// wire regardless of the wire's charge sign.
double wire_potential(const LineChargeSystem& sys, std::size_t k, Complex z) {
  const double sign = sys.charges[k].strength > 0 ? 1.0 : -1.0;
  double re_w = 0.0;
  for (const LineCharge& c : sys.charges) re_w -= c.strength * std::log(std::abs(z - c.position));
  return sign * re_w;
}

struct ContourRadii {
  double mean = 0.0, min = 0.0, max = 0.0;
  double east = 0.0, north = 0.0, west = 0.0, south = 0.0;  // cardinal radii
};

// Radii of the level-set contour around wire k at 16 equally spaced angles.
ContourRadii contour_radii(const LineChargeSystem& sys, std::size_t k, double level,
                           double r_max) {
  constexpr int kAngles = 16;
  const Complex z0 = sys.charges[k].position;
  ContourRadii out;
  out.min = std::numeric_limits<double>::infinity();
  for (int a = 0; a < kAngles; ++a) {
    const double theta = 2.0 * kPi * a / kAngles;
    const Complex dir(std::cos(theta), std::sin(theta));
    double lo = 1e-9 * r_max, hi = r_max;
    const double f_lo = wire_potential(sys, k, z0 + lo * dir) - level;
    const double f_hi = wire_potential(sys, k, z0 + hi * dir) - level;
    if (!(f_lo > 0.0) || !(f_hi < 0.0))
      throw physics_error("equipotential contour not bracketed around wire " +
                          std::to_string(k + 1) + "; the requested diameter is too large");
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (wire_potential(sys, k, z0 + mid * dir) - level > 0.0 ? lo : hi) = mid;
    }
    const double r = 0.5 * (lo + hi);
    out.mean += r / kAngles;
    out.min = std::min(out.min, r);
    out.max = std::max(out.max, r);
    if (a == 0) out.east = r;
    if (a == kAngles / 4) out.north = r;
    if (a == kAngles / 2) out.west = r;
    if (a == 3 * kAngles / 4) out.south = r;
  }
  return out;
}

double mean_potential_at_radius(const LineChargeSystem& sys, std::size_t k, double r) {
  constexpr int kAngles = 16;
  const Complex z0 = sys.charges[k].position;
  double sum = 0.0;
  for (int a = 0; a < kAngles; ++a) {
    const double theta = 2.0 * kPi * a / kAngles;
    sum += wire_potential(sys, k, z0 + Complex(r * std::cos(theta), r * std::sin(theta)));
  }
  return sum / kAngles;
}

// Level whose contour around wire k has the requested mean diameter.
double level_for_diameter(const LineChargeSystem& sys, std::size_t k, double diameter,
                          double r_max) {
  const double target_r = 0.5 * diameter;
  double level_hi = mean_potential_at_radius(sys, k, std::max(target_r / 20.0, 1e-7 * r_max));
  double level_lo = mean_potential_at_radius(sys, k, 0.93 * r_max);
  if (!(level_lo < level_hi))
    throw physics_error("no usable level bracket around wire " + std::to_string(k + 1));
  for (int it = 0; it < 90; ++it) {
    const double mid = 0.5 * (level_lo + level_hi);
    const double mean_r = contour_radii(sys, k, mid, r_max).mean;
    (mean_r > target_r ? level_lo : level_hi) = mid;
  }
  return 0.5 * (level_lo + level_hi);
}

LineChargeSystem with_inner_ratio(const LineChargeSystem& sys,
                                  const std::vector<bool>& inner, double ratio) {
  LineChargeSystem scaled = sys;
  for (std::size_t k = 0; k < scaled.charges.size(); ++k)
    if (inner[k]) scaled.charges[k].strength *= ratio;
  return scaled;
}

bool point_less(Complex a, Complex b) {
  if (a.imag() != b.imag()) return a.imag() < b.imag();
  return a.real() < b.real();
}

}  // namespace

LineChargeSystem quadrupole_line_charges() {
  LineChargeSystem sys;
  sys.charges = {{Complex(1, 0), 1.0},
                 {Complex(-1, 0), 1.0},
                 {Complex(0, 1), -1.0},
                 {Complex(0, -1), -1.0}};
  sys.label = "quadrupole";
  return sys;
}

LineChargeSystem four_wire_surface_line_charges() {
  LineChargeSystem sys;
  sys.charges = {{Complex(-1.5, 0), -1.0},
                 {Complex(-0.5, 0), 1.0},
                 {Complex(0.5, 0), -1.0},
                 {Complex(1.5, 0), 1.0}};
  sys.label = "four-wire surface";
  return sys;
}

PotentialFieldSample complex_potential_and_field(const LineChargeSystem& sys, Complex z) {
  check_off_charges(sys, z);
  PotentialFieldSample out;
  out.w = 0.0;
  for (const LineCharge& c : sys.charges) out.w -= c.strength * std::log(z - c.position);
  // dw/dz = -Ex + i Ey  =>  Ex + i Ey = -conj(dw/dz)
  out.e = -std::conj(field_derivative(sys, z));
  return out;
}

double upsilon(const LineChargeSystem& sys, Complex z) {
  check_off_charges(sys, z);
  return std::norm(field_derivative(sys, z));
}

Vec2 upsilon_gradient(const LineChargeSystem& sys, Complex z) {
  check_off_charges(sys, z);
  const Complex a = std::conj(field_derivative(sys, z)) * field_derivative2(sys, z);
  return Vec2(2.0 * a.real(), -2.0 * a.imag());
}

Eigen::Matrix2d upsilon_hessian(const LineChargeSystem& sys, Complex z) {
  check_off_charges(sys, z);
  const Complex g = field_derivative2(sys, z);
  const Complex b = std::conj(field_derivative(sys, z)) * field_derivative3(sys, z);
  const double g2 = std::norm(g);
  Eigen::Matrix2d h;
  h(0, 0) = 2.0 * (g2 + b.real());
  h(1, 1) = 2.0 * (g2 - b.real());
  h(0, 1) = h(1, 0) = -2.0 * b.imag();
  return h;
}

std::vector<AnalyticStationaryPoint> stationary_points(const LineChargeSystem& sys,
                                               const StationarySearchOptions& options) {
  if (sys.charges.size() < 2) throw input_error("line-charge system needs at least 2 charges");
  const double keep_box = 1.25 * options.half_box;
  std::vector<AnalyticStationaryPoint> found;

  for (int a = 0; a < options.lattice_n; ++a) {
    for (int b = 0; b < options.lattice_n; ++b) {
      const double step = 2.0 * options.half_box / (options.lattice_n - 1);
      Complex z(-options.half_box + a * step, -options.half_box + b * step);
      if (distance_to_charges(sys, z) < 0.15) continue;

      bool converged = false;
      for (int it = 0; it < options.max_iterations; ++it) {
        if (distance_to_charges(sys, z) < 1e-5 || std::abs(z.real()) > keep_box ||
            std::abs(z.imag()) > keep_box)
          break;
        const Vec2 g = upsilon_gradient(sys, z);
        if (g.norm() < options.grad_tol) {
          converged = true;
          break;
        }
        const Eigen::Matrix2d h = upsilon_hessian(sys, z);
        Vec2 s;
        const double det = h.determinant();
        if (std::abs(det) > 1e-14 * (1.0 + h.squaredNorm())) {
          s = -h.inverse() * g;
        } else {
          s = -g;
        }
        const double len = s.norm();
        if (len > 0.3) s *= 0.3 / len;
        if (!s.allFinite()) break;
        z += Complex(s.x(), s.y());
      }
      if (!converged) continue;

      AnalyticStationaryPoint p;
      p.z = z;
      p.upsilon = upsilon(sys, z);
      p.grad_norm = upsilon_gradient(sys, z).norm();

      const Eigen::Matrix2d h = upsilon_hessian(sys, z);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(h);
      const double l0 = eig.eigenvalues()(0), l1 = eig.eigenvalues()(1);
      const double tau = 1e-7 * std::max(1.0, std::max(std::abs(l0), std::abs(l1)));
      if (std::max(std::abs(l0), std::abs(l1)) < 1e-12) continue;  // flat far field
      if (l0 > tau) {
        p.kind = StationaryKind::kMinimum;
      } else if (l1 < -tau) {
        p.kind = StationaryKind::kMaximum;
      } else if (l0 < -tau && l1 > tau) {
        p.kind = StationaryKind::kSaddle;
      } else {
        continue;  // degenerate
      }

      bool merged = false;
      for (AnalyticStationaryPoint& q : found) {
        if (std::abs(q.z - p.z) < options.merge_radius) {
          if (p.grad_norm < q.grad_norm) q = p;
          merged = true;
          break;
        }
      }
      if (!merged) found.push_back(p);
    }
  }
  std::sort(found.begin(), found.end(),
            [](const AnalyticStationaryPoint& a, const AnalyticStationaryPoint& b) {
              return point_less(a.z, b.z);
            });
  return found;
}

AnalyticTrapResult reference_quadrupole() {
  AnalyticTrapResult r;
  const double c = 1.0 / std::sqrt(2.0 * std::sqrt(3.0));
  r.minima = {Complex(0, 0)};
  r.maxima = {Complex(-c, -c), Complex(c, -c), Complex(-c, c), Complex(c, c)};
  r.curvature_at_min = 32.0;
  r.upsilon_at_max = 3.0 * std::sqrt(3.0);
  r.frequency_ratio_vs_quadrupole = 1.0;
  r.depth_ratio_vs_quadrupole = 1.0;
  return r;
}

AnalyticTrapResult reference_four_wire_surface() {
  AnalyticTrapResult r;
  const double y_min = std::sqrt(3.0) / 2.0;
  const double y_max = std::sqrt(3.0 + 4.0 * std::sqrt(3.0)) / 2.0;
  r.minima = {Complex(0, -y_min), Complex(0, y_min)};
  r.maxima = {Complex(0, -y_max), Complex(0, y_max)};
  r.curvature_at_min = 8.0 / 3.0;
  r.upsilon_at_max = 1.0 / (7.0 + 4.0 * std::sqrt(3.0));
  r.frequency_ratio_vs_quadrupole = 1.0 / (2.0 * std::sqrt(3.0));
  r.depth_ratio_vs_quadrupole = 1.0 / (3.0 * (12.0 + 7.0 * std::sqrt(3.0)));
  return r;
}

FiniteConductorFit finite_conductor_fit(const LineChargeSystem& sys, double wire_diameter) {
  if (sys.charges.size() < 2) throw input_error("line-charge system needs at least 2 charges");
  const double min_sep = min_charge_separation(sys);
  if (!(wire_diameter > 0.0) || !(wire_diameter < 0.5 * min_sep))
    throw input_error("wire diameter must be positive and below half the minimum charge "
                      "separation");
  const double r_max = 0.45 * min_sep;

  // Split charges into an inner and an outer group by distance from the
  // charge centroid; the inner group's strength is the fitted degree of
  // freedom.
  Complex centroid = 0.0;
  for (const LineCharge& c : sys.charges) centroid += c.position;
  centroid /= static_cast<double>(sys.charges.size());
  std::vector<double> dist;
  dist.reserve(sys.charges.size());
  for (const LineCharge& c : sys.charges) dist.push_back(std::abs(c.position - centroid));
  const double lo = *std::min_element(dist.begin(), dist.end());
  const double hi = *std::max_element(dist.begin(), dist.end());
  if (hi - lo < 1e-9 * (hi + lo))
    throw input_error("charges are equidistant from their centroid; no inner/outer split");
  const double split = 0.5 * (lo + hi);
  std::vector<bool> inner(sys.charges.size());
  std::size_t inner_idx = sys.charges.size(), outer_idx = sys.charges.size();
  for (std::size_t k = 0; k < sys.charges.size(); ++k) {
    inner[k] = dist[k] < split;
    if (inner[k] && inner_idx == sys.charges.size()) inner_idx = k;
    if (!inner[k] && outer_idx == sys.charges.size()) outer_idx = k;
  }

  // Mismatch between the inner wire's contour diameter and the target when
  // the level is set by the outer wire's matched contour.
  const auto mismatch = [&](double ratio, double* level_out) {
    const LineChargeSystem scaled = with_inner_ratio(sys, inner, ratio);
    const double level = level_for_diameter(scaled, outer_idx, wire_diameter, r_max);
    if (level_out) *level_out = level;
    return 2.0 * contour_radii(scaled, inner_idx, level, r_max).mean - wire_diameter;
  };

  double ratio_lo = 1.0, ratio_hi = 2.5;
  double g_lo = mismatch(ratio_lo, nullptr);
  if (g_lo > 0.0) {
    ratio_hi = 1.0;
    ratio_lo = 0.4;
    g_lo = mismatch(ratio_lo, nullptr);
  }
  if (g_lo > 0.0) throw physics_error("inner/outer charge-ratio fit has no bracket");

  double ratio = ratio_lo, level = 0.0;
  for (int it = 0; it < 80; ++it) {
    ratio = 0.5 * (ratio_lo + ratio_hi);
    const double g = mismatch(ratio, &level);
    if (std::abs(g) <= 1e-4 * wire_diameter) break;
    (g < 0.0 ? ratio_lo : ratio_hi) = ratio;
  }

  FiniteConductorFit fit;
  fit.charge_ratio = ratio;
  fit.wire_diameter = wire_diameter;
  fit.surface_level = level;

  const LineChargeSystem corrected = with_inner_ratio(sys, inner, ratio);
  for (std::size_t k = 0; k < corrected.charges.size(); ++k) {
    const ContourRadii radii = contour_radii(corrected, k, level, r_max);
    fit.circularity = std::max(fit.circularity, radii.max / radii.min - 1.0);
    WireContour wire;
    wire.center = corrected.charges[k].position;
    wire.mean_diameter = 2.0 * radii.mean;
    wire.horizontal_diameter = radii.east + radii.west;
    wire.vertical_diameter = radii.north + radii.south;
    wire.min_radius = radii.min;
    wire.max_radius = radii.max;
    fit.wires.push_back(wire);
  }

  const LineChargeSystem quad = quadrupole_line_charges();
  fit.quadrupole_level =
      level_for_diameter(quad, 0, wire_diameter, 0.45 * min_charge_separation(quad));

  // Characterize the corrected system.  Field nulls are the trap minima;
  // the escape points are the non-null stationary points of lowest Upsilon
  // (Upsilon is subharmonic, so they are 2D saddles: maxima only along the
  // escape direction).
  AnalyticTrapResult& res = fit.result;
  std::vector<AnalyticStationaryPoint> barriers;
  for (const AnalyticStationaryPoint& p : stationary_points(corrected)) {
    if (p.kind == StationaryKind::kMinimum) {
      res.minima.push_back(p.z);
    } else {
      barriers.push_back(p);
    }
  }
  if (res.minima.empty() || barriers.empty())
    throw physics_error("corrected system has no trap minima or escape points");
  res.upsilon_at_max = std::numeric_limits<double>::infinity();
  for (const AnalyticStationaryPoint& p : barriers)
    res.upsilon_at_max = std::min(res.upsilon_at_max, p.upsilon);
  for (const AnalyticStationaryPoint& p : barriers)
    if (p.upsilon <= res.upsilon_at_max * (1.0 + 1e-9)) res.maxima.push_back(p.z);
  res.curvature_at_min = 2.0 * std::norm(field_derivative2(corrected, res.minima.front()));

  const AnalyticTrapResult quad_ref = reference_quadrupole();
  res.frequency_ratio_vs_quadrupole =
      std::sqrt(res.curvature_at_min / quad_ref.curvature_at_min);
  res.depth_ratio_vs_quadrupole = res.upsilon_at_max / quad_ref.upsilon_at_max;

  fit.note = "conductor surfaces are equipotential contours; the inner/outer charge ratio is "
             "fitted so all wire contours at one matched level share the target mean diameter; "
             "quadrupole comparisons keep unit charge on the outer wires";
  return fit;
}

}  // namespace iontrap
