#include "iontrap/export.hpp"

#include <cstdio>

#include <json.hpp>

#include "iontrap/constants.hpp"
#include "iontrap/geometry_io.hpp"
#include "iontrap/hash.hpp"
#include "iontrap/units.hpp"

namespace iontrap {

namespace {

using nlohmann::json;

json solver_json(const SolverOptions& s) {
  json j;
  j["tol"] = s.tol;
  j["max_sweeps"] = s.max_sweeps;
  j["cascade"] = s.cascade;
  j["cascade_min_dim"] = s.cascade_min_dim;
  j["cascade_level_sweeps"] = s.cascade_level_sweeps;
  return j;
}

json manifest_object(const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["tool"] = kToolName;
  j["tool_version"] = m.tool_version;
  j["parameters"] = json::object();
  for (const auto& [name, value] : m.parameters) j["parameters"][name] = value;
  if (m.geometry_hash) j["geometry_hash"] = hash_text(*m.geometry_hash);
  if (m.solver) j["solver"] = solver_json(*m.solver);
  j["outputs"] = m.outputs;
  return j;
}

}  // namespace

std::uint64_t geometry_hash(const CrossSectionGeometry& g) {
  return fnv1a64(serialize_spec_file(g));
}

std::string hash_text(std::uint64_t hash) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string manifest_json(const RunManifest& m) {
  return manifest_object(m).dump(2) + "\n";
}

std::string manifest_csv_line(const RunManifest& m) {
  return "# manifest: " + manifest_object(m).dump() + "\n";
}

std::string characterization_json(const TrapCharacterization& tc, const Provenance& prov,
                                  const RunManifest* manifest) {
  json j;
  j["geometry_label"] = tc.geometry_label;
  j["species"] = {{"mass_kg", tc.species.mass}, {"charge_c", tc.species.charge}};
  j["drive"] = {{"v0_v", tc.drive.v0},
                {"omega_rad_per_s", tc.drive.omega},
                {"frequency_hz", tc.drive.omega / (2.0 * kPi)}};
  j["d_m"] = tc.d;
  j["r_min_m"] = {tc.r_min.x(), tc.r_min.y()};
  j["hessian_j_per_m2"] = {{tc.hessian(0, 0), tc.hessian(0, 1)},
                           {tc.hessian(1, 0), tc.hessian(1, 1)}};
  j["secular_frequencies_rad_per_s"] = {tc.secular_frequencies[0], tc.secular_frequencies[1]};
  j["secular_frequencies_hz"] = {tc.secular_frequencies[0] / (2.0 * kPi),
                                 tc.secular_frequencies[1] / (2.0 * kPi)};
  j["q_params"] = {tc.q_params[0], tc.q_params[1]};
  j["principal_axes_deg"] = {tc.principal_axes[0], tc.principal_axes[1]};
  j["depth_ev"] = tc.depth_ev;
  j["escape_point_m"] = {tc.escape_point.x(), tc.escape_point.y()};
  j["depth_grid_limited"] = tc.depth_grid_limited;
  j["normalized_f"] = tc.normalized_f;
  j["normalized_u"] = tc.normalized_u;
  j["provenance"] = {{"grid_h_m", prov.grid_h},
                     {"grid_nx", prov.grid_nx},
                     {"grid_ny", prov.grid_ny},
                     {"margin_factor_d", prov.margin_factor},
                     {"solver_tol", prov.solver_tol},
                     {"residual", prov.residual},
                     {"geometry_hash", hash_text(prov.geometry_hash)},
                     {"calibration_scale", prov.calibration_scale},
                     {"calibration_iterations", prov.calibration_iterations}};
  if (manifest) j["manifest"] = manifest_object(*manifest);
  return j.dump(2) + "\n";
}

std::string field_csv(const Array2d& values, const Grid& grid, const std::string& quantity) {
  std::string out;
  out.reserve(static_cast<std::size_t>(grid.nx) * grid.ny * 12 + 256);
  out += "# quantity: " + quantity + "\n";
  out += "# nx: " + std::to_string(grid.nx) + "\n";
  out += "# ny: " + std::to_string(grid.ny) + "\n";
  out += "# h_m: " + format_shortest(grid.h) + "\n";
  out += "# origin_x_m: " + format_shortest(grid.origin.x()) + "\n";
  out += "# origin_y_m: " + format_shortest(grid.origin.y()) + "\n";
  out += "# layout: row-major; line j holds y(j) = origin_y + j*h, columns i ascending in x\n";
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      if (i) out += ',';
      out += format_shortest(values(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out;
  out.reserve(traj.t.size() * 64 + 512);
  out += "# species_mass_kg: " + format_shortest(traj.species.mass) + "\n";
  out += "# species_charge_c: " + format_shortest(traj.species.charge) + "\n";
  out += "# drive_v0_v: " + format_shortest(traj.drive.v0) + "\n";
  out += "# drive_omega_rad_per_s: " + format_shortest(traj.drive.omega) + "\n";
  out += "# dt_s: " + format_shortest(traj.dt) + "\n";
  out += "# initial_position_m: " + format_shortest(traj.initial_position.x()) + "," +
         format_shortest(traj.initial_position.y()) + "\n";
  out += "# initial_velocity_mps: " + format_shortest(traj.initial_velocity.x()) + "," +
         format_shortest(traj.initial_velocity.y()) + "\n";
  out += std::string("# escaped: ") + (traj.escaped ? "true" : "false") + "\n";
  if (traj.escaped) out += "# escape_time_s: " + format_shortest(traj.escape_time) + "\n";
  out += "t_s,x_m,y_m,vx_mps,vy_mps\n";
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    out += format_shortest(traj.t[k]);
    out += ',';
    out += format_shortest(traj.x[k]);
    out += ',';
    out += format_shortest(traj.y[k]);
    out += ',';
    out += format_shortest(traj.vx[k]);
    out += ',';
    out += format_shortest(traj.vy[k]);
    out += '\n';
  }
  return out;
}

}  // namespace iontrap
