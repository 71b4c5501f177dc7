#include "iontrap/scaling.hpp"

#include <cmath>
#include <cstddef>
#include <sstream>

#include "iontrap/constants.hpp"
#include "iontrap/errors.hpp"
#include "iontrap/units.hpp"

namespace iontrap {

namespace {

void validate_scenario(const ScalingScenario& s) {
  if (!(s.species.mass > 0.0)) {
    throw input_error("scaling scenario: ion mass must be positive");
  }
  if (s.species.charge == 0.0 || !std::isfinite(s.species.charge)) {
    throw input_error("scaling scenario: ion charge must be nonzero");
  }
  if (!(s.q_i > 0.0) || !(s.q_i < 0.9)) {
    throw input_error("scaling scenario: q_i must lie in (0, 0.9)");
  }
  if (!(s.e0 > 0.0)) {
    throw input_error("scaling scenario: surface field E0 must be positive");
  }
  if (!(s.beta > 0.0) || !(s.beta <= 1.0)) {
    throw input_error("scaling scenario: beta must lie in (0, 1]");
  }
}

}  // namespace

ScalingScenario beryllium_scenario() {
  ScalingScenario s;
  s.species = Species{9.0 * kAtomicMassUnit, kElementaryCharge};
  s.q_i = 0.21;
  s.e0 = 1e6;
  s.beta = 0.34;
  return s;
}

ScalingPoint evaluate(const ScalingScenario& s, double radius) {
  validate_scenario(s);
  if (!(radius > 0.0)) {
    throw input_error("scaling evaluate: radius must be positive");
  }
  const double m = s.species.mass;
  const double q_charge = std::abs(s.species.charge);

  ScalingPoint p;
  p.radius = radius;
  p.v0 = s.e0 * radius;
  p.omega_drive = std::sqrt(2.0 * q_charge * p.v0 / (m * s.q_i * radius * radius));
  p.u_max = s.beta * s.q_i * q_charge * s.e0 * radius / 8.0;
  p.u_max_ev = joules_to_ev(p.u_max);
  p.omega_secular = 0.5 * std::sqrt(s.q_i * q_charge * s.e0 / (m * radius));
  p.quantum_ratio = s.beta / (4.0 * kHbar) *
                    std::sqrt(s.q_i * q_charge * m * s.e0) * radius * std::sqrt(radius);
  return p;
}

double min_radius_for_ratio(const ScalingScenario& s, double target) {
  validate_scenario(s);
  if (!(target >= 1.0)) {
    throw input_error("scaling min_radius_for_ratio: target must be >= 1");
  }
  const double m = s.species.mass;
  const double q_charge = std::abs(s.species.charge);
  const double base =
      4.0 * kHbar * target / (s.beta * std::sqrt(s.q_i * q_charge * m * s.e0));
  return std::cbrt(base * base);
}

std::vector<ScalingScanRow> scan(const ScalingScenario& s,
                                 const std::vector<double>& radii,
                                 const std::vector<double>& e0_values) {
  validate_scenario(s);
  if (radii.empty()) {
    throw input_error("scaling scan: need at least one radius");
  }
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) {
      throw input_error("scaling scan: radii must be positive");
    }
    if (i > 0 && !(radii[i] > radii[i - 1])) {
      throw input_error("scaling scan: radii must be strictly increasing");
    }
  }
  if (e0_values.empty()) {
    throw input_error("scaling scan: need at least one field value");
  }

  std::vector<ScalingScanRow> rows;
  rows.reserve(radii.size() * e0_values.size());
  for (double e0 : e0_values) {
    if (!(e0 > 0.0)) {
      throw input_error("scaling scan: field values must be positive");
    }
    ScalingScenario varied = s;
    varied.e0 = e0;
    for (double r : radii) {
      rows.push_back(ScalingScanRow{e0, evaluate(varied, r)});
    }
  }
  return rows;
}

std::string scan_csv(const std::vector<ScalingScanRow>& rows) {
  std::ostringstream out;
  out << "e0_v_per_m,radius_m,v0_v,omega_drive_rad_per_s,u_max_j,u_max_ev,"
         "omega_secular_rad_per_s,quantum_ratio\n";
  for (const ScalingScanRow& row : rows) {
    const ScalingPoint& p = row.point;
    out << format_shortest(row.e0) << ',' << format_shortest(p.radius) << ','
        << format_shortest(p.v0) << ',' << format_shortest(p.omega_drive) << ','
        << format_shortest(p.u_max) << ',' << format_shortest(p.u_max_ev) << ','
        << format_shortest(p.omega_secular) << ','
        << format_shortest(p.quantum_ratio) << '\n';
  }
  return out.str();
}

std::string scenario_presets_json() {
  const ScalingScenario be = beryllium_scenario();
  std::ostringstream out;
  out << "{\n"
      << "  \"schema\": \"iontrap-scaling-presets\",\n"
      << "  \"version\": 1,\n"
      << "  \"presets\": {\n"
      << "    \"beryllium\": {\n"
      << "      \"mass_kg\": " << format_shortest(be.species.mass) << ",\n"
      << "      \"charge_c\": " << format_shortest(be.species.charge) << ",\n"
      << "      \"q_i\": " << format_shortest(be.q_i) << ",\n"
      << "      \"e0_v_per_m\": " << format_shortest(be.e0) << ",\n"
      << "      \"beta\": " << format_shortest(be.beta) << "\n"
      << "    }\n"
      << "  }\n"
      << "}\n";
  return out.str();
}

HeatingRegime heating_exponent(double d, double skin_depth,
                               std::optional<double> patch_size) {
  if (!(d > 0.0) || !(skin_depth > 0.0) ||
      (patch_size.has_value() && !(*patch_size > 0.0))) {
    throw input_error("heating_exponent: all lengths must be positive");
  }

  HeatingRegime r;
  if (patch_size.has_value() && *patch_size < d) {
    r.exponent = -4;
    r.exponent_far = -4;
    r.label = "patch-potential";
  } else if (d < skin_depth / 10.0) {
    r.exponent = -3;
    r.exponent_far = -3;
    r.label = "near-field";
  } else if (d > 10.0 * skin_depth) {
    r.exponent = -2;
    r.exponent_far = -2;
    r.label = "far-field";
  } else {
    r.exponent = -3;
    r.exponent_far = -2;
    r.transitional = true;
    r.label = "transitional";
  }
  return r;
}

}  // namespace iontrap
