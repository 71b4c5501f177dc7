#pragma once

// Practical trap-engineering analyses: RF power dissipated in the leads and
// in the substrate dielectric, control-line RC filtering, a survey table of
// candidate substrate materials, the depth/frequency-vs-aspect-ratio
// exponents of the three-layer geometry, and the sensitivity of the trapping
// field to the substrate permittivity in surface designs.

#include <cstdint>
#include <string>
#include <vector>

#include "iontrap/constants.hpp"
#include "iontrap/geometry.hpp"
#include "iontrap/laplace.hpp"

namespace iontrap {

// --- RF dissipation and filtering ---------------------------------------------

struct DissipationInput {
  double capacitance = 0.0;  // RF-electrode-to-ground capacitance [F]
  double omega = 0.0;        // drive angular frequency [rad/s]
  double v0 = 0.0;           // peak RF amplitude [V]
  double r_lead = 0.0;       // series lead resistance at the drive frequency [ohm]
  double tan_delta = 0.0;    // substrate loss tangent
};

struct DissipationResult {
  double i_rms = 0.0;         // C * omega * V0 / sqrt(2) [A]
  double r_esr = 0.0;         // tan_delta / (C * omega) [ohm]
  double p_lead = 0.0;        // I_rms^2 * R_lead [W]
  double p_dielectric = 0.0;  // I_rms^2 * R_esr [W]
  double p_total = 0.0;       // p_lead + p_dielectric, exactly
};

// RF power burned in the drive lead and in the substrate, modeling the trap
// as a capacitor with an equivalent series resistance tan_delta/(C*omega).
// Excludes radiation and any frequency dependence of the lead resistance;
// r_lead is taken at the operating frequency.  Requires capacitance and
// omega positive, the rest non-negative.
DissipationResult dissipated_power(const DissipationInput& in);

// First-order low-pass corner frequency 1/(2 pi R C) [Hz] of a control-line
// filter; R and C must be positive.
double rc_rolloff(double resistance, double capacitance);

// --- Substrate materials survey ------------------------------------------------

// Room-temperature RF-range properties of readily available substrates.
// Crystalline values are orientation-averaged approximations; semiconductor
// values assume low or intrinsic doping.
struct MaterialRecord {
  std::string name;
  double thermal_conductivity = 0.0;  // W/(m K)
  double resistivity = 0.0;           // ohm cm
  double dielectric_constant = 0.0;
  double tan_delta = 0.0;
  double roughness = 0.0;             // surface roughness [nm]
  double dielectric_strength = 0.0;   // kV/mm
};

// The immutable ten-row survey table, alphabetical by material name.
const std::vector<MaterialRecord>& materials_db();

// The table as a versioned JSON resource (the canonical embedded form) and
// as CSV with a header row.
std::string materials_json();
std::string materials_csv();

// FNV-1a hash of materials_json(); pinning this catches any accidental edit
// of the embedded table.
std::uint64_t materials_checksum();

// --- Aspect-ratio exponents ----------------------------------------------------

// Numerical settings for the aspect-ratio scan.  The ion and drive only set
// overall scale factors of depth and frequency, so the fitted exponents do
// not depend on them; the defaults give convenient magnitudes.
struct AspectScanNumerics {
  Species species{9.0 * kAtomicMassUnit, kElementaryCharge};
  DriveConfig drive{1.0, 2.0 * kPi * 50e6};
  double nodes_per_half_width = 40.0;  // grid resolution at small gamma
  double nodes_per_opening = 10.0;     // min nodes across the 2b opening
  SolverOptions solver{1e-8, 0, true, 95, 60};  // scan-grade tolerance
};

struct AspectRatioPoint {
  double gamma = 0.0;
  double depth_ev = 0.0;        // trap depth at this gamma [eV]
  double omega_secular = 0.0;   // geometric-mean secular frequency [rad/s]
  double depth_rel = 0.0;       // depth / depth at the first usable point
  double omega_rel = 0.0;       // omega / omega at the first usable point
  double h = 0.0;               // grid spacing used [m]
  bool usable = false;          // false when no bounded trap was found
  std::string note;             // diagnostic for unusable points
};

struct AspectRatioFit {
  double depth_exponent = 0.0;      // log-log slope of depth vs gamma
  double frequency_exponent = 0.0;  // log-log slope of omega vs gamma
  double depth_residual = 0.0;      // RMS log-space fit residual
  double frequency_residual = 0.0;
  std::vector<AspectRatioPoint> points;
};

// Solves the three-layer geometry at constant trap width over the given
// aspect ratios (gamma = slot width / vertical opening, each >= 1, strictly
// increasing, at least 6 usable points), with conductor thickness 0.02x the
// trap width, then fits unweighted log-log least-squares exponents for trap
// depth and secular frequency versus gamma.  Points where no bounded trap
// exists are excluded from the fit and flagged.  Only the three-layer family
// supports this scan.
AspectRatioFit aspect_ratio_exponents(GeometryKind family, const std::vector<double>& gammas,
                                      double trap_width,
                                      const AspectScanNumerics& numerics = {});

// CSV rendering of a fit (provenance comments + header + one row per gamma).
std::string aspect_scan_csv(const AspectRatioFit& fit);

// --- Substrate-permittivity sensitivity ----------------------------------------

struct DielectricSensitivity {
  double relative_difference = 0.0;  // max |E_eps - E_vac| / max |E_vac| on the disc
  Vec2 r_min = Vec2::Zero();         // trap minimum of the vacuum solve [m]
  double disc_radius = 0.0;          // sampling disc radius (0.2 d) [m]
  double eps_substrate = 1.0;
};

// How much the trapping field changes when the half-space below the
// electrode plane (y < 0) is filled with dielectric instead of vacuum:
// solves the RF pattern both ways and reports the largest field change over
// a disc of radius 0.2 d around the trap minimum, normalized by the largest
// vacuum field magnitude on that disc (a pointwise relative error is
// ill-defined at the minimum, where the field vanishes).  The geometry must
// be a surface layout (every electrode at y >= 0) and eps_substrate >= 1.
// Grid spacing h defaults to d/40 when zero.
DielectricSensitivity dielectric_sensitivity(const CrossSectionGeometry& g,
                                             double eps_substrate, double h = 0.0);

}  // namespace iontrap
