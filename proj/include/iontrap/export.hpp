#pragma once

// Machine-readable run artifacts.  Every CLI invocation produces a
// RunManifest describing exactly what was computed; JSON outputs embed it
// and CSV outputs carry it in their comment header, so identical manifests
// imply identical outputs (bitwise for JSON, value-equal for CSV).  JSON is
// the canonical structured format, CSV the array format; nothing binary.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "iontrap/geometry.hpp"
#include "iontrap/grid.hpp"
#include "iontrap/laplace.hpp"
#include "iontrap/pseudo.hpp"

namespace iontrap {

inline constexpr const char* kToolName = "iontrap";
inline constexpr const char* kToolVersion = "1.0.0";

struct RunManifest {
  std::string command;  // subcommand name
  // Full parameter record: every option that shaped the run, rendered to
  // text (numbers in shortest round-trip form) so serialization is stable.
  std::map<std::string, std::string> parameters;
  // FNV-1a of the canonical geometry spec text, when a geometry was involved.
  std::optional<std::uint64_t> geometry_hash;
  std::optional<SolverOptions> solver;  // present for grid-solver runs
  std::string tool_version = kToolVersion;
  std::vector<std::string> outputs;  // files written by the run, in order
};

// Hash of serialize_spec_file(g); equal geometries hash equally because the
// serialization is byte-stable.  The text form prefixes the hex digest with
// the algorithm name.
std::uint64_t geometry_hash(const CrossSectionGeometry& g);
std::string hash_text(std::uint64_t hash);

// Canonical JSON (keys sorted, numbers in shortest round-trip form):
// identical manifests serialize byte-identically.
std::string manifest_json(const RunManifest& m);

// The same canonical JSON on a single '#' comment line, for embedding at the
// top of CSV outputs.
std::string manifest_csv_line(const RunManifest& m);

// Solve metadata carried into every characterization report.
struct Provenance {
  double grid_h = 0.0;         // spacing [m]
  int grid_nx = 0, grid_ny = 0;
  double margin_factor = 0.0;  // outer-boundary margin in units of d
  double solver_tol = 0.0;
  double residual = 0.0;       // achieved relative residual
  std::uint64_t geometry_hash = 0;
  double calibration_scale = 1.0;  // electrode rescale from distance calibration
  int calibration_iterations = 1;
};

// TrapCharacterization as a JSON document with the provenance block; when a
// manifest is given it is embedded under "manifest".
std::string characterization_json(const TrapCharacterization& tc, const Provenance& prov,
                                  const RunManifest* manifest = nullptr);

// Row-major CSV of a node-centered array: comment header with the grid
// metadata (node counts, spacing, origin), then one line per y node
// (j ascending), each holding nx comma-separated values (i ascending).
std::string field_csv(const Array2d& values, const Grid& grid, const std::string& quantity);

// Trajectory samples as CSV: integration metadata in the comment header,
// then t_s,x_m,y_m,vx_mps,vy_mps rows.
std::string trajectory_csv(const Trajectory& traj);

}  // namespace iontrap
