#pragma once

// Finite-difference solver for the 2D electrostatic boundary-value problem:
// each electrode held at a fixed voltage, grounded box at the outer grid
// boundary, optional spatially varying relative permittivity (for substrate
// studies).  Discretization is a node-centered 5-point stencil with harmonic
// averaging of eps on cell faces, relaxed by red-black successive
// over-relaxation (SOR) with the over-relaxation factor chosen from the grid
// dimensions.
//
// For speed the solve is seeded coarse-to-fine: the same problem is first
// relaxed on a stack of 2x-coarsened grids and prolonged (bilinear) as the
// initial guess for the next finer level.  The relaxation scheme itself is
// plain SOR at every level; the cascade only supplies initial guesses.
//
// Convergence metric ("residual"): the max-norm Jacobi update magnitude
//   r(i,j) = | sum_f w_f (phi_nb - phi_c) | / sum_f w_f   [volts]
// over all non-electrode cells, normalized per 1 V of excitation.

#include <cstdint>
#include <vector>
#include <optional>
#include <string>

#include "iontrap/geometry.hpp"
#include "iontrap/grid.hpp"

namespace iontrap {

// Relative permittivity per grid node (>= 1).  An empty array means vacuum
// everywhere (enables a faster solver path).
struct DielectricMap {
  Array2d eps;
  std::string description = "vacuum";
  // Top of the solid substrate half-space, if one exists.  Ions cannot occupy
  // y below this level regardless of the permittivity value (a substrate with
  // eps_r = 1 is still solid matter for trapping purposes).
  std::optional<double> solid_below_y;

  bool is_vacuum() const { return eps.size() == 0; }
  double at(int i, int j) const { return is_vacuum() ? 1.0 : eps(i, j); }
};

DielectricMap make_vacuum();

// eps_r everywhere below y = surface_y (the substrate half-space), 1 above.
DielectricMap make_substrate(const Grid& grid, double surface_y, double eps_r);

// Node ownership: kFree for vacuum/dielectric cells, kBoundary for the
// grounded outer ring, otherwise the owning electrode's index.
struct ElectrodeMask {
  static constexpr std::int16_t kFree = -1;
  static constexpr std::int16_t kBoundary = -2;
  Array2<std::int16_t> owner;

  bool is_free(int i, int j) const { return owner(i, j) == kFree; }
};

// Rasterizes electrodes onto the grid.  Rejects electrodes thinner than two
// cells in any direction (the stencil cannot represent them) and electrodes
// that leave the grid interior.
ElectrodeMask rasterize_electrodes(const CrossSectionGeometry& g, const Grid& grid);

struct SolverOptions {
  double tol = 1e-9;        // residual target per 1 V excitation (0 < tol < 1e-3)
  long max_sweeps = 0;      // 0 -> the documented cap 50*max(nx,ny)^2
  bool cascade = true;      // coarse-to-fine initial-guess seeding
  int cascade_min_dim = 95;     // stop coarsening below this many nodes
  int cascade_level_sweeps = 60;  // smoothing sweeps at intermediate levels
};

struct SolveStats {
  double residual = 0.0;  // achieved max-norm residual (volts per unit excitation)
  long sweeps = 0;        // full red+black sweeps at the finest level
  bool converged = false;
};

// One unit-voltage Laplace solution per electrode, on a shared grid/mask.
struct PotentialBasis {
  Grid grid;
  ElectrodeMask mask;
  std::vector<Array2d> phi;      // per electrode, 1 V on own cells, 0 on others
  std::vector<SolveStats> stats;

  bool converged() const {
    for (const SolveStats& s : stats)
      if (!s.converged) return false;
    return !stats.empty();
  }
};

// Solves the unit-voltage problem for every electrode.  Non-convergence at
// the iteration cap is reported through the per-electrode stats (with the
// achieved residual), not thrown.
PotentialBasis solve_basis(const CrossSectionGeometry& g, const Grid& grid,
                           const DielectricMap& eps, const SolverOptions& options = {});

// Single relaxation solve with the given per-electrode voltages.  By
// linearity this equals superpose(solve_basis(...), voltages); pipelines use
// it to avoid solving electrodes they never excite.  The convergence target
// is tol * max(1, max |voltage|).
Array2d solve_pattern(const CrossSectionGeometry& g, const Grid& grid,
                      const DielectricMap& eps, const std::vector<double>& voltages,
                      const SolverOptions& options = {}, SolveStats* stats = nullptr);

// Exact linear combination sum_e voltages[e] * basis.phi[e].
Array2d superpose(const PotentialBasis& basis, const std::vector<double>& voltages);

// Per-electrode voltage vector for an RF drive plus static control set:
// RF electrodes at rf_volts, controls at their static entries, grounds at 0.
std::vector<double> electrode_voltages(const CrossSectionGeometry& g, double rf_volts,
                                       const StaticConfig& statics = {});

// Electric field from a potential array: negated central differences,
// one-sided away from electrode cells next to metal, zero on metal.
struct FieldMap {
  Grid grid;
  Array2d ex, ey;  // V/m
};

FieldMap field_of(const Array2d& phi, const Grid& grid, const ElectrodeMask& mask);

// Residual report over non-electrode cells for a frozen potential array.
struct ResidualReport {
  double max_residual = 0.0;
  double rms_residual = 0.0;
};

ResidualReport residual_check(const Array2d& phi, const Grid& grid,
                              const DielectricMap& eps, const ElectrodeMask& mask);

std::vector<ResidualReport> residual_check(const PotentialBasis& basis,
                                           const DielectricMap& eps);

// Free charge per unit length [C/m] enclosed by the grid-aligned box, from
// the Gauss flux integral of eps0 * eps * E through the box faces.  The box
// is clamped onto grid nodes; it must not cut through electrode cells other
// than the enclosed electrode's own.
double enclosed_charge(const Array2d& phi, const Grid& grid, const DielectricMap& eps,
                       const BoundingBox& box);

// Capacitance-style coupling matrix C(e, b) = charge on electrode e when
// electrode b alone is at 1 V, from Gauss flux boxes grown `pad` cells
// around each electrode.  Requires the grown boxes to be disjoint.
Eigen::MatrixXd charge_coupling_matrix(const CrossSectionGeometry& g,
                                       const PotentialBasis& basis,
                                       const DielectricMap& eps, int pad = 3);

}  // namespace iontrap
