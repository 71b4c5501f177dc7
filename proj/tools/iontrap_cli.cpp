// Command-line front end: every analysis exposed as a reproducible run with
// machine-readable outputs.  Each invocation writes its payload files plus a
// manifest.json into --out; JSON payloads embed the manifest, CSV payloads
// carry it as a leading comment line.  Exit status: 0 success, 1 usage error
// (bad flags, malformed input), 2 physics failure (no trap, non-convergence),
// with a diagnostic on stderr.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "iontrap/analytic.hpp"
#include "iontrap/constants.hpp"
#include "iontrap/contours.hpp"
#include "iontrap/engineering.hpp"
#include "iontrap/errors.hpp"
#include "iontrap/export.hpp"
#include "iontrap/geometry.hpp"
#include "iontrap/geometry_io.hpp"
#include "iontrap/pipeline.hpp"
#include "iontrap/pseudo.hpp"
#include "iontrap/scaling.hpp"
#include "iontrap/spectrum.hpp"
#include "iontrap/units.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace iontrap;

// --- Small helpers -------------------------------------------------------------

void write_file(const fs::path& dir, const std::string& name, const std::string& content) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw input_error("cannot create output directory " + dir.string());
  const fs::path path = dir / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw input_error("failed writing " + path.string());
}

json manifest_as_json(const RunManifest& m) { return json::parse(manifest_json(m)); }

void record(RunManifest& m, const std::string& key, double value) {
  m.parameters[key] = format_shortest(value);
}

void record(RunManifest& m, const std::string& key, const std::string& value) {
  m.parameters[key] = value;
}

json vec2_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

json complex_list_json(const std::vector<Complex>& zs) {
  json arr = json::array();
  for (const Complex& z : zs) arr.push_back(json::array({z.real(), z.imag()}));
  return arr;
}

json analytic_result_json(const AnalyticTrapResult& r) {
  json j;
  j["minima"] = complex_list_json(r.minima);
  j["maxima"] = complex_list_json(r.maxima);
  j["curvature_at_min"] = r.curvature_at_min;
  j["upsilon_at_max"] = r.upsilon_at_max;
  j["frequency_ratio_vs_quadrupole"] = r.frequency_ratio_vs_quadrupole;
  j["depth_ratio_vs_quadrupole"] = r.depth_ratio_vs_quadrupole;
  return j;
}

// --- Shared flag groups ----------------------------------------------------------

struct SpeciesDriveFlags {
  std::string mass = "9u";
  std::string charge = "1e";
  std::string v0 = "100V";
  std::string freq = "100MHz";

  void attach(CLI::App* cmd) {
    cmd->add_option("--mass", mass, "ion mass (unit-suffixed: kg, g, u)")
        ->capture_default_str();
    cmd->add_option("--charge", charge, "ion charge (unit-suffixed: C, e)")
        ->capture_default_str();
    cmd->add_option("--v0", v0, "peak RF amplitude (unit-suffixed: uV, mV, V, kV)")
        ->capture_default_str();
    cmd->add_option("--freq", freq, "RF drive frequency (unit-suffixed: Hz, kHz, MHz, GHz)")
        ->capture_default_str();
  }

  Species species() const { return Species{parse_mass(mass), parse_charge(charge)}; }
  DriveConfig drive() const {
    return DriveConfig{parse_voltage(v0), 2.0 * kPi * parse_frequency(freq)};
  }

  void record_into(RunManifest& m) const {
    const Species sp = species();
    const DriveConfig dr = drive();
    record(m, "mass_kg", sp.mass);
    record(m, "charge_c", sp.charge);
    record(m, "v0_v", dr.v0);
    record(m, "omega_rad_per_s", dr.omega);
  }
};

struct GeometryFlags {
  std::string file;
  std::string kind;
  std::string d = "50um";
  std::string width, gap, thickness, rod_radius, center_gap;
  std::string rf_width_left, rf_width_right;
  double gamma = 0.0;  // 0 = use the builder default

  void attach(CLI::App* cmd) {
    cmd->add_option("--geometry", file, "geometry spec file (see README for the format)");
    cmd->add_option("--kind", kind,
                    "canonical layout: four-rod, two-layer, three-layer, four-wire, "
                    "five-wire, five-wire-in-plane");
    cmd->add_option("--d", d, "ion-to-electrode design distance (length)")
        ->capture_default_str();
    cmd->add_option("--width", width, "electrode width override (length)");
    cmd->add_option("--gap", gap, "inter-electrode gap override (length)");
    cmd->add_option("--thickness", thickness, "electrode thickness override (length)");
    cmd->add_option("--rod-radius", rod_radius, "four-rod rod radius override (length)");
    cmd->add_option("--center-gap", center_gap, "in-plane central gap override (length)");
    cmd->add_option("--rf-width-left", rf_width_left, "five-wire left RF rail width (length)");
    cmd->add_option("--rf-width-right", rf_width_right,
                    "five-wire right RF rail width (length)");
    cmd->add_option("--gamma", gamma, "layered-geometry aspect ratio (dimensionless)");
  }

  bool from_file() const { return !file.empty(); }

  CanonicalParams params() const {
    CanonicalParams p;
    p.d = parse_length(d);
    if (!width.empty()) p.electrode_width = parse_length(width);
    if (!gap.empty()) p.gap = parse_length(gap);
    if (!thickness.empty()) p.thickness = parse_length(thickness);
    if (!rod_radius.empty()) p.rod_radius = parse_length(rod_radius);
    if (!center_gap.empty()) p.center_gap = parse_length(center_gap);
    if (!rf_width_left.empty()) p.rf_width_left = parse_length(rf_width_left);
    if (!rf_width_right.empty()) p.rf_width_right = parse_length(rf_width_right);
    if (gamma != 0.0) p.gamma = gamma;
    return p;
  }

  GeometryKind kind_enum() const { return parse_geometry_kind(kind); }

  CrossSectionGeometry build(RunManifest& m) const {
    if (from_file() == !kind.empty())
      throw input_error("give exactly one of --geometry FILE or --kind NAME");
    if (from_file()) {
      std::ifstream in(file, std::ios::binary);
      if (!in) throw input_error("cannot read geometry file " + file);
      std::stringstream buf;
      buf << in.rdbuf();
      CrossSectionGeometry g = parse_spec_file(buf.str());
      record(m, "geometry_file", file);
      m.geometry_hash = geometry_hash(g);
      return g;
    }
    CrossSectionGeometry g = build_canonical(kind_enum(), params());
    const ResolvedParams r = resolve_params(kind_enum(), params());
    record(m, "kind", kind);
    record(m, "d_m", r.d);
    record(m, "electrode_width_m", r.electrode_width);
    record(m, "gap_m", r.gap);
    record(m, "thickness_m", r.thickness);
    record(m, "gamma", r.gamma);
    record(m, "rod_radius_m", r.rod_radius);
    record(m, "slab_extent_m", r.slab_extent);
    record(m, "center_gap_m", r.center_gap);
    record(m, "rf_width_left_m", r.rf_width_left);
    record(m, "rf_width_right_m", r.rf_width_right);
    m.geometry_hash = geometry_hash(g);
    return g;
  }
};

StaticConfig parse_controls(const std::vector<std::string>& entries, RunManifest& m) {
  StaticConfig statics;
  for (const std::string& entry : entries) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos)
      throw input_error("--control expects INDEX=VOLTAGE, got '" + entry + "'");
    int index = 0;
    try {
      std::size_t used = 0;
      index = std::stoi(entry.substr(0, eq), &used);
      if (used != eq) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw input_error("--control index must be an integer, got '" + entry + "'");
    }
    statics.control_voltages[index] = parse_voltage(entry.substr(eq + 1));
    record(m, "control_" + std::to_string(index) + "_v", statics.control_voltages[index]);
  }
  return statics;
}

Provenance make_provenance(const AnalysisResult& r, const AnalysisOptions& opt) {
  Provenance prov;
  prov.grid_h = r.grid.h;
  prov.grid_nx = r.grid.nx;
  prov.grid_ny = r.grid.ny;
  prov.margin_factor = opt.margin_factor;
  prov.solver_tol = opt.solver.tol;
  prov.residual = std::max(r.rf_stats.residual, r.static_stats.residual);
  prov.geometry_hash = geometry_hash(r.geometry);
  prov.calibration_scale = r.scale;
  prov.calibration_iterations = r.calibration_iterations;
  return prov;
}

struct CommonState {
  std::string out_dir = ".";
  std::string seed;  // reserved: all computation is deterministic
};

RunManifest new_manifest(const CommonState& common, const std::string& command) {
  RunManifest m;
  m.command = command;
  if (!common.seed.empty()) m.parameters["seed"] = common.seed;
  return m;
}

// --- Subcommands -----------------------------------------------------------------

void cmd_analyze(const CommonState& common, const GeometryFlags& gf,
                 const SpeciesDriveFlags& sd, const std::vector<std::string>& controls,
                 double cells_per_d, double margin, double tol, bool calibrate,
                 const std::string& chip_floor, int contour_count, double contour_cap_ev,
                 bool export_fields) {
  RunManifest m = new_manifest(common, "analyze");
  const CrossSectionGeometry g = gf.build(m);
  sd.record_into(m);

  AnalysisOptions opt = gf.from_file() ? AnalysisOptions{} : canonical_options(gf.kind_enum());
  opt.cells_per_d = cells_per_d;
  opt.margin_factor = margin;
  opt.solver.tol = tol;
  opt.calibrate_distance = calibrate;
  opt.statics = parse_controls(controls, m);
  if (!chip_floor.empty()) opt.chip_floor_y = parse_length(chip_floor);
  record(m, "cells_per_d", opt.cells_per_d);
  record(m, "margin_factor", opt.margin_factor);
  record(m, "calibrate_distance", std::string(calibrate ? "true" : "false"));
  if (opt.chip_floor_y) record(m, "chip_floor_y_m", *opt.chip_floor_y);
  m.solver = opt.solver;

  const AnalysisResult r = analyze_geometry(g, sd.species(), sd.drive(), opt);

  m.outputs.push_back("characterization.json");
  if (contour_count > 0) m.outputs.push_back("contours.csv");
  if (export_fields) {
    m.outputs.push_back("phi_rf.csv");
    m.outputs.push_back("phi_static.csv");
    m.outputs.push_back("pseudopotential_ev.csv");
  }
  if (contour_count > 0) {
    record(m, "contour_count", static_cast<double>(contour_count));
    record(m, "contour_cap_ev", contour_cap_ev > 0.0 ? contour_cap_ev : r.tc.depth_ev);
  }

  const std::string report = characterization_json(r.tc, make_provenance(r, opt), &m);
  write_file(common.out_dir, "characterization.json", report);
  if (contour_count > 0) {
    const Array2d u_ev = r.pseudo.u / kElementaryCharge;
    const double cap = contour_cap_ev > 0.0 ? contour_cap_ev : r.tc.depth_ev;
    const auto levels = geometric_levels(0.0, cap, contour_count);
    const auto lines = extract_contours(u_ev, r.grid, levels, &r.mask);
    write_file(common.out_dir, "contours.csv",
               manifest_csv_line(m) + "# quantity: pseudopotential_ev\n" + contours_csv(lines));
  }
  if (export_fields) {
    write_file(common.out_dir, "phi_rf.csv",
               manifest_csv_line(m) + field_csv(r.phi_rf, r.grid, "phi_rf_v"));
    write_file(common.out_dir, "phi_static.csv",
               manifest_csv_line(m) + field_csv(r.phi_static, r.grid, "phi_static_v"));
    write_file(common.out_dir, "pseudopotential_ev.csv",
               manifest_csv_line(m) +
                   field_csv(r.pseudo.u / kElementaryCharge, r.grid, "pseudopotential_ev"));
  }
  write_file(common.out_dir, "manifest.json", manifest_json(m));
  std::cout << report;
}

void cmd_oracle(const CommonState& common, const std::string& system, double wire_diameter) {
  RunManifest m = new_manifest(common, "oracle");
  record(m, "system", system);
  if (wire_diameter > 0.0) record(m, "wire_diameter", wire_diameter);
  m.outputs.push_back("oracle.json");

  json j;
  j["quadrupole"] = analytic_result_json(reference_quadrupole());
  j["four_wire_surface"] = analytic_result_json(reference_four_wire_surface());
  if (wire_diameter > 0.0) {
    const LineChargeSystem sys = system == "quadrupole" ? quadrupole_line_charges()
                                                        : four_wire_surface_line_charges();
    const FiniteConductorFit fit = finite_conductor_fit(sys, wire_diameter);
    json f;
    f["system"] = system;
    f["charge_ratio"] = fit.charge_ratio;
    f["wire_diameter"] = fit.wire_diameter;
    f["circularity"] = fit.circularity;
    f["surface_level"] = fit.surface_level;
    f["quadrupole_level"] = fit.quadrupole_level;
    f["note"] = fit.note;
    f["result"] = analytic_result_json(fit.result);
    json wires = json::array();
    for (const WireContour& w : fit.wires) {
      wires.push_back(json{{"center", json::array({w.center.real(), w.center.imag()})},
                           {"mean_diameter", w.mean_diameter},
                           {"horizontal_diameter", w.horizontal_diameter},
                           {"vertical_diameter", w.vertical_diameter}});
    }
    f["wires"] = wires;
    j["finite_conductor_fit"] = f;
  }
  j["manifest"] = manifest_as_json(m);
  const std::string text = j.dump(2) + "\n";
  write_file(common.out_dir, "oracle.json", text);
  write_file(common.out_dir, "manifest.json", manifest_json(m));
  std::cout << text;
}

json scaling_point_json(const ScalingPoint& p) {
  json j;
  j["radius_m"] = p.radius;
  j["v0_v"] = p.v0;
  j["omega_drive_rad_per_s"] = p.omega_drive;
  j["drive_frequency_hz"] = p.omega_drive / (2.0 * kPi);
  j["u_max_j"] = p.u_max;
  j["u_max_ev"] = p.u_max_ev;
  j["omega_secular_rad_per_s"] = p.omega_secular;
  j["secular_frequency_hz"] = p.omega_secular / (2.0 * kPi);
  j["quantum_ratio"] = p.quantum_ratio;
  return j;
}

void cmd_scaling(const CommonState& common, const std::string& preset, const std::string& radius,
                 double target_ratio, const std::string& e0, double beta, double q_i, bool scan) {
  if (preset != "be-quadrupole")
    throw input_error("unknown scaling preset '" + preset + "' (available: be-quadrupole)");
  ScalingScenario s = beryllium_scenario();
  if (!e0.empty()) s.e0 = parse_field(e0);
  if (beta > 0.0) s.beta = beta;
  if (q_i > 0.0) s.q_i = q_i;

  RunManifest m = new_manifest(common, "scaling");
  record(m, "preset", preset);
  record(m, "e0_v_per_m", s.e0);
  record(m, "beta", s.beta);
  record(m, "q_i", s.q_i);
  record(m, "mass_kg", s.species.mass);
  record(m, "charge_c", s.species.charge);
  m.outputs.push_back("scaling.json");
  if (scan) m.outputs.push_back("scaling_scan.csv");

  json j;
  j["preset"] = preset;
  j["scenario"] = {{"mass_kg", s.species.mass},
                   {"charge_c", s.species.charge},
                   {"q_i", s.q_i},
                   {"e0_v_per_m", s.e0},
                   {"beta", s.beta}};
  if (!radius.empty()) {
    const double r = parse_length(radius);
    record(m, "radius_m", r);
    j["point"] = scaling_point_json(evaluate(s, r));
  }
  if (target_ratio > 0.0) {
    record(m, "target_ratio", target_ratio);
    const double r = min_radius_for_ratio(s, target_ratio);
    j["target_ratio"] = target_ratio;
    j["min_radius_m"] = r;
    j["min_radius_point"] = scaling_point_json(evaluate(s, r));
  }
  if (scan) {
    // Four decades of size and four of surface field, log-spaced.
    std::vector<double> radii;
    for (int k = 0; k <= 48; ++k) radii.push_back(1e-9 * std::pow(10.0, k / 12.0));
    const std::vector<double> fields{1e6, 1e7, 1e8, 1e9};
    const auto rows = iontrap::scan(s, radii, fields);
    write_file(common.out_dir, "scaling_scan.csv", manifest_csv_line(m) + scan_csv(rows));
  }
  j["manifest"] = manifest_as_json(m);
  const std::string text = j.dump(2) + "\n";
  write_file(common.out_dir, "scaling.json", text);
  write_file(common.out_dir, "manifest.json", manifest_json(m));
  std::cout << text;
}

void cmd_dissipation(const CommonState& common, const std::string& capacitance,
                     const std::string& freq, const std::string& v0, const std::string& r_lead,
                     double tan_delta) {
  DissipationInput in;
  in.capacitance = parse_capacitance(capacitance);
  in.omega = 2.0 * kPi * parse_frequency(freq);
  in.v0 = parse_voltage(v0);
  in.r_lead = parse_resistance(r_lead);
  in.tan_delta = tan_delta;

  RunManifest m = new_manifest(common, "dissipation");
  record(m, "capacitance_f", in.capacitance);
  record(m, "omega_rad_per_s", in.omega);
  record(m, "v0_v", in.v0);
  record(m, "r_lead_ohm", in.r_lead);
  record(m, "tan_delta", in.tan_delta);
  m.outputs.push_back("dissipation.json");

  const DissipationResult r = dissipated_power(in);
  json j;
  j["i_rms_a"] = r.i_rms;
  j["r_esr_ohm"] = r.r_esr;
  j["p_lead_w"] = r.p_lead;
  j["p_dielectric_w"] = r.p_dielectric;
  j["p_total_w"] = r.p_total;
  j["manifest"] = manifest_as_json(m);
  const std::string text = j.dump(2) + "\n";
  write_file(common.out_dir, "dissipation.json", text);
  write_file(common.out_dir, "manifest.json", manifest_json(m));
  std::cout << text;
}

void cmd_rolloff(const CommonState& common, const std::string& resistance,
                 const std::string& capacitance) {
  const double r = parse_resistance(resistance);
  const double c = parse_capacitance(capacitance);

  RunManifest m = new_manifest(common, "rolloff");
  record(m, "resistance_ohm", r);
  record(m, "capacitance_f", c);
  m.outputs.push_back("rolloff.json");

  json j;
  j["corner_frequency_hz"] = rc_rolloff(r, c);
  j["manifest"] = manifest_as_json(m);
  const std::string text = j.dump(2) + "\n";
  write_file(common.out_dir, "rolloff.json", text);
  write_file(common.out_dir, "manifest.json", manifest_json(m));
  std::cout << text;
}

void cmd_materials(const CommonState& common, const std::string& format) {
  if (format != "json" && format != "csv")
    throw input_error("--format must be json or csv, got '" + format + "'");
  RunManifest m = new_manifest(common, "materials");
  record(m, "format", format);
  record(m, "checksum", hash_text(materials_checksum()));
  const std::string name = format == "json" ? "materials.json" : "materials.csv";
  m.outputs.push_back(name);

  const std::string payload = format == "json" ? materials_json() : materials_csv();
  // The table is a fixed resource: emit it verbatim (the manifest accompanies
  // it instead of being embedded, so the checksum stays format-independent).
  write_file(common.out_dir, name, payload);
  write_file(common.out_dir, "manifest.json", manifest_json(m));
  std::cout << payload;
}

void cmd_scan_aspect(const CommonState& common, std::vector<double> gammas,
                     const std::string& width, double tol) {
  AspectScanNumerics numerics;
  if (tol > 0.0) numerics.solver.tol = tol;
  const double w = parse_length(width);

  RunManifest m = new_manifest(common, "scan-aspect");
  record(m, "trap_width_m", w);
  record(m, "solver_tol", numerics.solver.tol);
  {
    std::string list;
    for (std::size_t i = 0; i < gammas.size(); ++i)
      list += (i ? "," : "") + format_shortest(gammas[i]);
    record(m, "gammas", list);
  }
  m.solver = numerics.solver;
  m.outputs.push_back("aspect_fit.json");
  m.outputs.push_back("aspect_scan.csv");

  const AspectRatioFit fit = aspect_ratio_exponents(GeometryKind::kThreeLayer, gammas, w, numerics);

  json j;
  j["depth_exponent"] = fit.depth_exponent;
  j["frequency_exponent"] = fit.frequency_exponent;
  j["depth_residual"] = fit.depth_residual;
  j["frequency_residual"] = fit.frequency_residual;
  json pts = json::array();
  for (const AspectRatioPoint& p : fit.points) {
    pts.push_back(json{{"gamma", p.gamma},
                       {"depth_ev", p.depth_ev},
                       {"omega_secular_rad_per_s", p.omega_secular},
                       {"usable", p.usable},
                       {"note", p.note}});
  }
  j["points"] = pts;
  j["manifest"] = manifest_as_json(m);
  const std::string text = j.dump(2) + "\n";
  write_file(common.out_dir, "aspect_fit.json", text);
  write_file(common.out_dir, "aspect_scan.csv", manifest_csv_line(m) + aspect_scan_csv(fit));
  write_file(common.out_dir, "manifest.json", manifest_json(m));
  std::cout << text;
}

void cmd_dielectric(const CommonState& common, const GeometryFlags& gf, double eps,
                    const std::string& h_text) {
  RunManifest m = new_manifest(common, "dielectric");
  const CrossSectionGeometry g = gf.build(m);
  record(m, "eps_substrate", eps);
  const double h = h_text.empty() ? 0.0 : parse_length(h_text);
  if (h > 0.0) record(m, "h_m", h);
  m.outputs.push_back("dielectric.json");

  const DielectricSensitivity s = dielectric_sensitivity(g, eps, h);
  json j;
  j["relative_difference"] = s.relative_difference;
  j["r_min_m"] = vec2_json(s.r_min);
  j["disc_radius_m"] = s.disc_radius;
  j["eps_substrate"] = s.eps_substrate;
  j["manifest"] = manifest_as_json(m);
  const std::string text = j.dump(2) + "\n";
  write_file(common.out_dir, "dielectric.json", text);
  write_file(common.out_dir, "manifest.json", manifest_json(m));
  std::cout << text;
}

void cmd_traj(const CommonState& common, const GeometryFlags& gf, const SpeciesDriveFlags& sd,
              const std::vector<std::string>& controls, double cells_per_d, double margin,
              double tol, const std::string& dx_text, const std::string& dy_text, double periods,
              int steps_per_period) {
  RunManifest m = new_manifest(common, "traj");
  const CrossSectionGeometry g = gf.build(m);
  sd.record_into(m);

  AnalysisOptions opt = gf.from_file() ? AnalysisOptions{} : canonical_options(gf.kind_enum());
  opt.cells_per_d = cells_per_d;
  opt.margin_factor = margin;
  opt.solver.tol = tol;
  opt.statics = parse_controls(controls, m);
  m.solver = opt.solver;

  const AnalysisResult r = analyze_geometry(g, sd.species(), sd.drive(), opt);

  // Launch offsets default to 2% of the design distance sideways.
  const double dx = dx_text.empty() ? 0.02 * r.geometry.d : parse_length(dx_text);
  const double dy = dy_text.empty() ? 0.0 : parse_length(dy_text);
  record(m, "dx_m", dx);
  record(m, "dy_m", dy);
  record(m, "periods", periods);
  record(m, "steps_per_period", static_cast<double>(steps_per_period));
  m.outputs.push_back("trajectory.csv");
  m.outputs.push_back("spectrum.json");

  const DriveConfig drive = sd.drive();
  const double duration = periods * 2.0 * kPi / drive.omega;
  const Vec2 r0 = r.tc.r_min + Vec2(dx, dy);
  const Trajectory traj =
      simulate_trajectory(r.phi_rf, r.phi_static, r.grid, r.mask, sd.species(), drive, r0,
                          Vec2::Zero(), duration, steps_per_period);

  json j;
  j["escaped"] = traj.escaped;
  if (traj.escaped) j["escape_time_s"] = traj.escape_time;
  j["hessian_secular_hz"] = {r.tc.secular_frequencies[0] / (2.0 * kPi),
                             r.tc.secular_frequencies[1] / (2.0 * kPi)};
  const double f_drive = drive.omega / (2.0 * kPi);
  if (!traj.escaped) {
    const auto centered = [](const std::vector<double>& v) {
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      std::vector<double> out(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - mean;
      return out;
    };
    const AmplitudeSpectrum sx = amplitude_spectrum(centered(traj.x), traj.dt);
    const AmplitudeSpectrum sy = amplitude_spectrum(centered(traj.y), traj.dt);
    const double lo = 2.0 * sx.bin_width;
    const SpectralPeak px = dominant_peak(sx, lo, 0.45 * f_drive);
    const SpectralPeak py = dominant_peak(sy, lo, 0.45 * f_drive);
    if (px.found) j["secular_peak_x_hz"] = px.frequency;
    if (py.found) j["secular_peak_y_hz"] = py.frequency;
    try {
      j["micromotion_ratio"] = micromotion_ratio(traj);
    } catch (const physics_error& e) {
      j["micromotion_ratio"] = nullptr;
      j["micromotion_note"] = e.what();
    }
  }
  j["manifest"] = manifest_as_json(m);
  const std::string text = j.dump(2) + "\n";
  write_file(common.out_dir, "trajectory.csv", manifest_csv_line(m) + trajectory_csv(traj));
  write_file(common.out_dir, "spectrum.json", text);
  write_file(common.out_dir, "manifest.json", manifest_json(m));
  std::cout << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D electrostatics and pseudopotential analysis of linear RF ion traps"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kToolVersion));

  CommonState common;
  app.add_option("--out", common.out_dir, "output directory for artifacts")
      ->capture_default_str();
  app.add_option("--seed", common.seed,
                 "reserved; all computation is deterministic (recorded in the manifest)");

  // analyze
  auto* analyze = app.add_subcommand(
      "analyze", "solve a geometry and report the trap characterization");
  auto gf_analyze = std::make_shared<GeometryFlags>();
  auto sd_analyze = std::make_shared<SpeciesDriveFlags>();
  gf_analyze->attach(analyze);
  sd_analyze->attach(analyze);
  auto controls_analyze = std::make_shared<std::vector<std::string>>();
  analyze->add_option("--control", *controls_analyze,
                      "control voltage INDEX=VOLTAGE (e.g. 0=-1.5V); repeatable");
  auto cells = std::make_shared<double>(40.0);
  auto margin = std::make_shared<double>(8.0);
  auto tol = std::make_shared<double>(1e-9);
  auto calibrate = std::make_shared<bool>(false);
  auto chip_floor = std::make_shared<std::string>();
  auto contour_count = std::make_shared<int>(0);
  auto contour_cap = std::make_shared<double>(0.0);
  auto export_fields = std::make_shared<bool>(false);
  analyze->add_option("--cells-per-d", *cells, "grid nodes per design distance d")
      ->capture_default_str();
  analyze->add_option("--margin", *margin, "outer boundary margin in units of d (>= 8)")
      ->capture_default_str();
  analyze->add_option("--tol", *tol, "solver residual tolerance")->capture_default_str();
  analyze->add_flag("--calibrate", *calibrate,
                    "rescale electrodes until the minimum sits at distance d from the surface");
  analyze->add_option("--chip-floor", *chip_floor,
                      "treat y below this level as ion loss (length; file-based geometries)");
  analyze->add_option("--contours", *contour_count,
                      "write contours.csv with this many pseudopotential isolines");
  analyze->add_option("--contour-cap-ev", *contour_cap,
                      "top contour level in eV (default: the trap depth)");
  analyze->add_flag("--export-fields", *export_fields,
                    "write phi_rf.csv, phi_static.csv, pseudopotential_ev.csv");
  analyze->callback([=, &common] {
    cmd_analyze(common, *gf_analyze, *sd_analyze, *controls_analyze, *cells, *margin, *tol,
                *calibrate, *chip_floor, *contour_count, *contour_cap, *export_fields);
  });

  // oracle
  auto* oracle = app.add_subcommand(
      "oracle", "closed-form line-charge references and finite-conductor fits");
  auto oracle_system = std::make_shared<std::string>("four-wire-surface");
  auto wire_diameter = std::make_shared<double>(0.0);
  oracle->add_option("--system", *oracle_system, "four-wire-surface or quadrupole")
      ->capture_default_str();
  oracle->add_option("--wire-diameter", *wire_diameter,
                     "finite conductor diameter in model units (0 = line charges only)")
      ->capture_default_str();
  oracle->callback([=, &common] { cmd_oracle(common, *oracle_system, *wire_diameter); });

  // scaling
  auto* scaling = app.add_subcommand(
      "scaling", "fixed-q, fixed-field miniaturization scaling laws");
  auto preset = std::make_shared<std::string>("be-quadrupole");
  auto radius = std::make_shared<std::string>();
  auto target_ratio = std::make_shared<double>(0.0);
  auto e0 = std::make_shared<std::string>();
  auto beta = std::make_shared<double>(0.0);
  auto q_i = std::make_shared<double>(0.0);
  auto do_scan = std::make_shared<bool>(false);
  scaling->add_option("--preset", *preset, "scenario preset (be-quadrupole)")
      ->capture_default_str();
  scaling->add_option("--radius", *radius, "evaluate the laws at this electrode scale (length)");
  scaling->add_option("--target-ratio", *target_ratio,
                      "report the smallest radius with this depth-to-quantum ratio");
  scaling->add_option("--e0", *e0, "override the breakdown surface field (e.g. 1GV/m)");
  scaling->add_option("--beta", *beta, "override the well-depth efficiency (0 < beta <= 1)");
  scaling->add_option("--q", *q_i, "override the Mathieu q parameter");
  scaling->add_flag("--scan", *do_scan, "write scaling_scan.csv over sizes and fields");
  scaling->callback([=, &common] {
    cmd_scaling(common, *preset, *radius, *target_ratio, *e0, *beta, *q_i, *do_scan);
  });

  // dissipation
  auto* dissipation = app.add_subcommand(
      "dissipation", "RF power dissipated in the leads and the substrate");
  auto cap_d = std::make_shared<std::string>("3pF");
  auto freq_d = std::make_shared<std::string>("100MHz");
  auto v0_d = std::make_shared<std::string>("100V");
  auto rlead = std::make_shared<std::string>("1Ohm");
  auto tand = std::make_shared<double>(4e-4);
  dissipation->add_option("--capacitance", *cap_d, "trap capacitance")->capture_default_str();
  dissipation->add_option("--freq", *freq_d, "drive frequency")->capture_default_str();
  dissipation->add_option("--v0", *v0_d, "peak RF amplitude")->capture_default_str();
  dissipation->add_option("--r-lead", *rlead, "series lead resistance")->capture_default_str();
  dissipation->add_option("--tan-delta", *tand, "substrate loss tangent")->capture_default_str();
  dissipation->callback(
      [=, &common] { cmd_dissipation(common, *cap_d, *freq_d, *v0_d, *rlead, *tand); });

  // rolloff
  auto* rolloff = app.add_subcommand("rolloff", "control-line RC low-pass corner frequency");
  auto res_r = std::make_shared<std::string>("1kOhm");
  auto cap_r = std::make_shared<std::string>("1nF");
  rolloff->add_option("--resistance", *res_r, "filter resistance")->capture_default_str();
  rolloff->add_option("--capacitance", *cap_r, "filter capacitance")->capture_default_str();
  rolloff->callback([=, &common] { cmd_rolloff(common, *res_r, *cap_r); });

  // materials
  auto* materials = app.add_subcommand("materials", "substrate materials survey table");
  auto format = std::make_shared<std::string>("json");
  materials->add_option("--format", *format, "json or csv")->capture_default_str();
  materials->callback([=, &common] { cmd_materials(common, *format); });

  // scan-aspect
  auto* scan_aspect = app.add_subcommand(
      "scan-aspect", "three-layer depth/frequency exponents versus aspect ratio");
  auto gammas = std::make_shared<std::vector<double>>(
      std::vector<double>{1.0, 1.5, 2.2, 3.3, 5.0, 7.5, 11.0, 15.0});
  auto scan_width = std::make_shared<std::string>("400um");
  auto scan_tol = std::make_shared<double>(0.0);
  scan_aspect->add_option("--gammas", *gammas, "aspect ratios to scan (>= 6, increasing)")
      ->delimiter(',')
      ->capture_default_str();
  scan_aspect->add_option("--width", *scan_width, "trap width held constant (length)")
      ->capture_default_str();
  scan_aspect->add_option("--tol", *scan_tol, "solver tolerance override");
  scan_aspect->callback(
      [=, &common] { cmd_scan_aspect(common, *gammas, *scan_width, *scan_tol); });

  // dielectric
  auto* dielectric = app.add_subcommand(
      "dielectric", "trapping-field sensitivity to the substrate permittivity");
  auto gf_diel = std::make_shared<GeometryFlags>();
  gf_diel->attach(dielectric);
  auto eps = std::make_shared<double>(10.0);
  auto diel_h = std::make_shared<std::string>();
  dielectric->add_option("--eps", *eps, "substrate relative permittivity (>= 1)")
      ->capture_default_str();
  dielectric->add_option("--h", *diel_h, "grid spacing override (length)");
  dielectric->callback([=, &common] { cmd_dielectric(common, *gf_diel, *eps, *diel_h); });

  // traj
  auto* traj = app.add_subcommand(
      "traj", "integrate an RF-driven trajectory and report its spectrum");
  auto gf_traj = std::make_shared<GeometryFlags>();
  auto sd_traj = std::make_shared<SpeciesDriveFlags>();
  gf_traj->attach(traj);
  sd_traj->attach(traj);
  auto controls_traj = std::make_shared<std::vector<std::string>>();
  traj->add_option("--control", *controls_traj,
                   "control voltage INDEX=VOLTAGE (e.g. 0=-1.5V); repeatable");
  auto cells_t = std::make_shared<double>(40.0);
  auto margin_t = std::make_shared<double>(8.0);
  auto tol_t = std::make_shared<double>(1e-9);
  auto dx = std::make_shared<std::string>();
  auto dy = std::make_shared<std::string>();
  auto periods = std::make_shared<double>(400.0);
  auto spp = std::make_shared<int>(50);
  traj->add_option("--cells-per-d", *cells_t, "grid nodes per design distance d")
      ->capture_default_str();
  traj->add_option("--margin", *margin_t, "outer boundary margin in units of d (>= 8)")
      ->capture_default_str();
  traj->add_option("--tol", *tol_t, "solver residual tolerance")->capture_default_str();
  traj->add_option("--dx", *dx, "launch offset from the minimum in x (length; default 2% of d)");
  traj->add_option("--dy", *dy, "launch offset from the minimum in y (length; default 0)");
  traj->add_option("--periods", *periods, "integration length in drive periods")
      ->capture_default_str();
  traj->add_option("--steps-per-period", *spp, "integration steps per drive period (>= 50)")
      ->capture_default_str();
  traj->callback([=, &common] {
    cmd_traj(common, *gf_traj, *sd_traj, *controls_traj, *cells_t, *margin_t, *tol_t, *dx, *dy,
             *periods, *spp);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const physics_error& e) {
    std::cerr << "physics error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
