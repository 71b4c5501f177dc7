#include "iontrap/engineering.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>

#include "iontrap/constants.hpp"
#include "iontrap/errors.hpp"
#include "iontrap/hash.hpp"
#include "iontrap/pseudo.hpp"
#include "iontrap/units.hpp"

namespace iontrap {

// --- RF dissipation and filtering ---------------------------------------------

DissipationResult dissipated_power(const DissipationInput& in) {
  if (!(in.capacitance > 0.0) || !(in.omega > 0.0)) {
    throw input_error("dissipated_power: capacitance and omega must be positive");
  }
  if (in.v0 < 0.0 || in.r_lead < 0.0 || in.tan_delta < 0.0) {
    throw input_error("dissipated_power: V0, R_lead, tan_delta must be non-negative");
  }
  DissipationResult r;
  r.i_rms = in.capacitance * in.omega * in.v0 / std::sqrt(2.0);
  r.r_esr = in.tan_delta / (in.capacitance * in.omega);
  r.p_lead = r.i_rms * r.i_rms * in.r_lead;
  r.p_dielectric = r.i_rms * r.i_rms * r.r_esr;
  r.p_total = r.p_lead + r.p_dielectric;
  return r;
}

double rc_rolloff(double resistance, double capacitance) {
  if (!(resistance > 0.0) || !(capacitance > 0.0)) {
    throw input_error("rc_rolloff: resistance and capacitance must be positive");
  }
  return 1.0 / (2.0 * kPi * resistance * capacitance);
}

// --- Substrate materials survey ------------------------------------------------

const std::vector<MaterialRecord>& materials_db() {
  static const std::vector<MaterialRecord> table = {
      {"AlN", 180.0, 1e13, 8.5, 3e-4, 50.0, 16.0},
      {"Alumina (99.5 %)", 30.0, 1e14, 9.8, 1e-4, 50.0, 20.0},
      {"BN", 28.0, 1e13, 4.1, 5e-4, 50.0, 30.0},
      {"Diamond", 2000.0, 1e14, 5.7, 6e-4, 50.0, 1000.0},
      {"Fused silica", 1.0, 1e16, 3.9, 4e-4, 2.0, 40.0},
      {"GaAs", 55.0, 1e8, 13.0, 1e-3, 25.0, 40.0},
      {"Quartz", 7.0, 1e16, 4.5, 2e-4, 2.0, 80.0},
      {"Sapphire", 45.0, 1e14, 11.0, 1e-4, 10.0, 35.0},
      {"Si", 150.0, 1e5, 12.0, 5e-3, 25.0, 30.0},
      {"SiC", 250.0, 3e5, 14.0, 2e-1, 50.0, 300.0},
  };
  return table;
}

std::string materials_json() {
  std::ostringstream out;
  out << "{\n"
      << "  \"schema\": \"iontrap-materials\",\n"
      << "  \"version\": 1,\n"
      << "  \"description\": \"Room-temperature RF-range substrate properties; "
         "approximate, orientation-averaged values; semiconductors at low or "
         "intrinsic doping.\",\n"
      << "  \"units\": {\n"
      << "    \"thermal_conductivity\": \"W/(m K)\",\n"
      << "    \"resistivity\": \"ohm cm\",\n"
      << "    \"dielectric_constant\": \"1\",\n"
      << "    \"tan_delta\": \"1\",\n"
      << "    \"roughness\": \"nm\",\n"
      << "    \"dielectric_strength\": \"kV/mm\"\n"
      << "  },\n"
      << "  \"materials\": [\n";
  const std::vector<MaterialRecord>& db = materials_db();
  for (std::size_t k = 0; k < db.size(); ++k) {
    const MaterialRecord& m = db[k];
    out << "    {\"name\": \"" << m.name << "\", \"thermal_conductivity\": "
        << format_shortest(m.thermal_conductivity) << ", \"resistivity\": "
        << format_shortest(m.resistivity) << ", \"dielectric_constant\": "
        << format_shortest(m.dielectric_constant) << ", \"tan_delta\": "
        << format_shortest(m.tan_delta) << ", \"roughness\": "
        << format_shortest(m.roughness) << ", \"dielectric_strength\": "
        << format_shortest(m.dielectric_strength) << "}"
        << (k + 1 < db.size() ? "," : "") << "\n";
  }
  out << "  ]\n}\n";
  return out.str();
}

std::string materials_csv() {
  std::ostringstream out;
  out << "name,thermal_conductivity_w_per_m_k,resistivity_ohm_cm,"
         "dielectric_constant,tan_delta,roughness_nm,dielectric_strength_kv_per_mm\n";
  for (const MaterialRecord& m : materials_db()) {
    // Material names contain no commas or quotes; emit them bare.
    out << m.name << ',' << format_shortest(m.thermal_conductivity) << ','
        << format_shortest(m.resistivity) << ','
        << format_shortest(m.dielectric_constant) << ','
        << format_shortest(m.tan_delta) << ',' << format_shortest(m.roughness)
        << ',' << format_shortest(m.dielectric_strength) << '\n';
  }
  return out.str();
}

std::uint64_t materials_checksum() { return fnv1a64(materials_json()); }

// --- Aspect-ratio exponents ----------------------------------------------------

namespace {

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
};

LogLogFit fit_log_log(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double lx = std::log(x[k]);
    const double ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  LogLogFit fit;
  const double denom = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = std::log(y[k]) - (fit.intercept + fit.slope * std::log(x[k]));
    ss += r * r;
  }
  fit.residual_rms = std::sqrt(ss / n);
  return fit;
}

}  // namespace

AspectRatioFit aspect_ratio_exponents(GeometryKind family, const std::vector<double>& gammas,
                                      double trap_width, const AspectScanNumerics& numerics) {
  if (family != GeometryKind::kThreeLayer) {
    throw input_error("aspect_ratio_exponents: only the three-layer family is supported");
  }
  if (!(trap_width > 0.0)) {
    throw input_error("aspect_ratio_exponents: trap width must be positive");
  }
  if (gammas.size() < 6) {
    throw input_error("aspect_ratio_exponents: need at least 6 aspect-ratio samples");
  }
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    if (!(gammas[k] >= 1.0) || !std::isfinite(gammas[k])) {
      throw input_error("aspect_ratio_exponents: aspect ratios must be >= 1");
    }
    if (k > 0 && !(gammas[k] > gammas[k - 1])) {
      throw input_error("aspect_ratio_exponents: aspect ratios must be strictly increasing");
    }
  }

  const double a = 0.5 * trap_width;  // slot half-width, constant across the scan
  AspectRatioFit result;
  result.points.resize(gammas.size());

  for (std::size_t k = 0; k < gammas.size(); ++k) {
    const double gamma = gammas[k];
    AspectRatioPoint& pt = result.points[k];
    pt.gamma = gamma;

    // Resolution follows the smallest feature: the vertical opening 2b
    // shrinks as 1/gamma and must keep nodes_per_opening nodes across it,
    // and the thin conductors (0.02 x width) always need >= 3 nodes.
    const double thickness = 0.02 * trap_width;
    const double nodes_per_a =
        std::max({numerics.nodes_per_half_width, 0.5 * gamma * numerics.nodes_per_opening,
                  3.0 * a / thickness});
    pt.h = a / nodes_per_a;

    CanonicalParams params;
    params.d = a;
    params.gamma = gamma;
    params.thickness = 0.02 * trap_width;
    const CrossSectionGeometry g = build_canonical(GeometryKind::kThreeLayer, params);

    const Grid grid = make_grid(g, pt.h);
    const ElectrodeMask mask = rasterize_electrodes(g, grid);
    SolveStats stats;
    const Array2d phi = solve_pattern(g, grid, make_vacuum(), electrode_voltages(g, 1.0),
                                      numerics.solver, &stats);
    if (!stats.converged) {
      pt.note = "field solve did not converge";
      continue;
    }
    const FieldMap field = field_of(phi, grid, mask);
    const PseudoField pseudo =
        pseudopotential_field(field, mask, numerics.species, numerics.drive);
    try {
      const TrapCharacterization tc =
          characterize(pseudo, Array2d::Zero(grid.nx, grid.ny));
      if (tc.depth_grid_limited || !(tc.depth_ev > 0.0)) {
        pt.note = "no bounded trap (escape basin reaches the domain boundary)";
        continue;
      }
      pt.depth_ev = tc.depth_ev;
      pt.omega_secular =
          std::sqrt(tc.secular_frequencies[0] * tc.secular_frequencies[1]);
      pt.usable = true;
    } catch (const physics_error& e) {
      pt.note = e.what();
    }
  }

  std::vector<double> gs, depths, omegas;
  for (const AspectRatioPoint& pt : result.points) {
    if (!pt.usable) continue;
    gs.push_back(pt.gamma);
    depths.push_back(pt.depth_ev);
    omegas.push_back(pt.omega_secular);
  }
  if (gs.size() < 2) {
    throw physics_error("aspect_ratio_exponents: fewer than 2 usable scan points");
  }
  for (AspectRatioPoint& pt : result.points) {
    if (!pt.usable) continue;
    pt.depth_rel = pt.depth_ev / depths.front();
    pt.omega_rel = pt.omega_secular / omegas.front();
  }

  const LogLogFit df = fit_log_log(gs, depths);
  const LogLogFit ff = fit_log_log(gs, omegas);
  result.depth_exponent = df.slope;
  result.frequency_exponent = ff.slope;
  result.depth_residual = df.residual_rms;
  result.frequency_residual = ff.residual_rms;
  return result;
}

std::string aspect_scan_csv(const AspectRatioFit& fit) {
  std::ostringstream out;
  out << "# three-layer aspect-ratio scan: constant trap width, conductor "
         "thickness 0.02 x width, RF pattern at fixed V0 and drive frequency\n"
      << "# depth_exponent=" << format_shortest(fit.depth_exponent)
      << " frequency_exponent=" << format_shortest(fit.frequency_exponent)
      << " depth_residual_rms=" << format_shortest(fit.depth_residual)
      << " frequency_residual_rms=" << format_shortest(fit.frequency_residual) << "\n"
      << "gamma,depth_ev,omega_secular_rad_per_s,depth_rel,omega_rel,h_m,usable,note\n";
  for (const AspectRatioPoint& pt : fit.points) {
    out << format_shortest(pt.gamma) << ',' << format_shortest(pt.depth_ev) << ','
        << format_shortest(pt.omega_secular) << ',' << format_shortest(pt.depth_rel)
        << ',' << format_shortest(pt.omega_rel) << ',' << format_shortest(pt.h) << ','
        << (pt.usable ? 1 : 0) << ',' << pt.note << '\n';
  }
  return out.str();
}

// --- Substrate-permittivity sensitivity ----------------------------------------

DielectricSensitivity dielectric_sensitivity(const CrossSectionGeometry& g,
                                             double eps_substrate, double h) {
  if (!(eps_substrate >= 1.0)) {
    throw input_error("dielectric_sensitivity: eps_substrate must be >= 1");
  }
  for (const Electrode& e : g.electrodes) {
    if (bounding_box(e.shape).ymin < -1e-9 * g.d) {
      throw input_error(
          "dielectric_sensitivity: requires a surface layout with every "
          "electrode at y >= 0 (substrate fills y < 0)");
    }
  }
  if (h == 0.0) h = g.d / 40.0;
  if (!(h > 0.0)) throw input_error("dielectric_sensitivity: h must be positive");

  const Grid grid = make_grid(g, h);
  const ElectrodeMask mask = rasterize_electrodes(g, grid);
  const std::vector<double> volts = electrode_voltages(g, 1.0);

  SolveStats vac_stats, sub_stats;
  const Array2d phi_vac = solve_pattern(g, grid, make_vacuum(), volts, {}, &vac_stats);
  const DielectricMap substrate = make_substrate(grid, 0.0, eps_substrate);
  const Array2d phi_sub = solve_pattern(g, grid, substrate, volts, {}, &sub_stats);
  if (!vac_stats.converged || !sub_stats.converged) {
    throw physics_error("dielectric_sensitivity: field solve did not converge");
  }
  const FieldMap e_vac = field_of(phi_vac, grid, mask);
  const FieldMap e_sub = field_of(phi_sub, grid, mask);

  // The trap minimum is a property of the field geometry alone; the ion and
  // drive here only scale the pseudopotential used to locate it.
  const Species probe_ion{9.0 * kAtomicMassUnit, kElementaryCharge};
  const DriveConfig probe_drive{1.0, 2.0 * kPi * 50e6};
  const PseudoField pseudo =
      pseudopotential_field(e_vac, mask, probe_ion, probe_drive, 0.0);
  const TrapCharacterization tc = characterize(pseudo, Array2d::Zero(grid.nx, grid.ny));

  DielectricSensitivity out;
  out.r_min = tc.r_min;
  out.disc_radius = 0.2 * g.d;
  out.eps_substrate = eps_substrate;

  double max_diff = 0.0;
  double max_vac = 0.0;
  const int i0 = std::max(0, grid.nearest_i(tc.r_min.x() - out.disc_radius) - 1);
  const int i1 = std::min(grid.nx - 1, grid.nearest_i(tc.r_min.x() + out.disc_radius) + 1);
  const int j0 = std::max(0, grid.nearest_j(tc.r_min.y() - out.disc_radius) - 1);
  const int j1 = std::min(grid.ny - 1, grid.nearest_j(tc.r_min.y() + out.disc_radius) + 1);
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      if (!mask.is_free(i, j)) continue;
      if ((grid.point(i, j) - tc.r_min).norm() > out.disc_radius) continue;
      const double dx = e_sub.ex(i, j) - e_vac.ex(i, j);
      const double dy = e_sub.ey(i, j) - e_vac.ey(i, j);
      max_diff = std::max(max_diff, std::hypot(dx, dy));
      max_vac = std::max(max_vac, std::hypot(e_vac.ex(i, j), e_vac.ey(i, j)));
    }
  }
  if (!(max_vac > 0.0)) {
    throw physics_error("dielectric_sensitivity: empty sampling disc");
  }
  out.relative_difference = max_diff / max_vac;
  return out;
}

}  // namespace iontrap
