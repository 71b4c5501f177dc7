#include "iontrap/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "iontrap/constants.hpp"
#include "iontrap/errors.hpp"

namespace iontrap {
namespace {

constexpr std::int16_t kFree = ElectrodeMask::kFree;
constexpr std::int16_t kBoundary = ElectrodeMask::kBoundary;

// Face-weight arrays for the eps-weighted stencil (empty in vacuum).
// wx(i,j) couples nodes (i,j)-(i+1,j); wy(i,j) couples (i,j)-(i,j+1).
struct Stencil {
  bool vacuum = true;
  Array2d wx, wy, inv_sum;
};

Stencil build_stencil(const DielectricMap& eps, int nx, int ny) {
  Stencil st;
  // A uniform eps_r = 1 map (e.g. an idealized substrate marked only as a
  // solid region) relaxes identically to vacuum; use the cheaper sweep.
  st.vacuum = eps.is_vacuum() || (eps.eps == 1.0).all();
  if (st.vacuum) return st;
  st.wx.setZero(nx, ny);
  st.wy.setZero(nx, ny);
  st.inv_sum.setZero(nx, ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      const double a = eps.eps(i, j), b = eps.eps(i + 1, j);
      st.wx(i, j) = 2.0 * a * b / (a + b);  // harmonic face average
    }
  }
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double a = eps.eps(i, j), b = eps.eps(i, j + 1);
      st.wy(i, j) = 2.0 * a * b / (a + b);
    }
  }
  for (int j = 1; j + 1 < ny; ++j) {
    for (int i = 1; i + 1 < nx; ++i) {
      st.inv_sum(i, j) =
          1.0 / (st.wx(i - 1, j) + st.wx(i, j) + st.wy(i, j - 1) + st.wy(i, j));
    }
  }
  return st;
}

// Rasterization without the resolution checks (also used for coarse levels,
// where electrodes are allowed to thin out or vanish).
Array2<std::int16_t> rasterize_raw(const CrossSectionGeometry& g, const Grid& grid) {
  Array2<std::int16_t> owner(grid.nx, grid.ny);
  owner.setConstant(kFree);
  // Electrode edges routinely land exactly on grid planes; a strict inclusion
  // test then keeps or drops edge nodes depending on rounding direction, which
  // breaks mirror symmetry by one cell.  Nodes within `tol` of the surface are
  // treated as metal (tol is far below any legal inter-electrode gap).
  const double tol = 1e-7 * grid.h;
  for (std::size_t e = 0; e < g.electrodes.size(); ++e) {
    const ElectrodeShape& shape = g.electrodes[e].shape;
    const BoundingBox box = bounding_box(shape);
    const int i0 = std::max(0, static_cast<int>(std::floor(grid.fx(Vec2(box.xmin, 0)))) - 1);
    const int i1 = std::min(grid.nx - 1, static_cast<int>(std::ceil(grid.fx(Vec2(box.xmax, 0)))) + 1);
    const int j0 = std::max(0, static_cast<int>(std::floor(grid.fy(Vec2(0, box.ymin)))) - 1);
    const int j1 = std::min(grid.ny - 1, static_cast<int>(std::ceil(grid.fy(Vec2(0, box.ymax)))) + 1);
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        const Vec2 p = grid.point(i, j);
        if (shape_contains(shape, p) || distance_to_surface(shape, p) <= tol)
          owner(i, j) = static_cast<std::int16_t>(e);
      }
    }
  }
  for (int i = 0; i < grid.nx; ++i) {
    owner(i, 0) = kBoundary;
    owner(i, grid.ny - 1) = kBoundary;
  }
  for (int j = 0; j < grid.ny; ++j) {
    owner(0, j) = kBoundary;
    owner(grid.nx - 1, j) = kBoundary;
  }
  return owner;
}

void apply_dirichlet(Array2d& phi, const Array2<std::int16_t>& owner,
                     const std::vector<double>& voltages) {
  const int nx = static_cast<int>(phi.rows());
  const int ny = static_cast<int>(phi.cols());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::int16_t o = owner(i, j);
      if (o == kFree) continue;
      phi(i, j) = (o == kBoundary) ? 0.0 : voltages[static_cast<std::size_t>(o)];
    }
  }
}

// One SOR pass over the given color ((i + j) % 2 == color), vacuum stencil.
void sweep_color_vacuum(Array2d& phi, const Array2<std::int16_t>& owner, double omega,
                        int color) {
  const int nx = static_cast<int>(phi.rows());
  const int ny = static_cast<int>(phi.cols());
  double* data = phi.data();
  const std::int16_t* own = owner.data();
#pragma omp parallel for schedule(static)
  for (int j = 1; j < ny - 1; ++j) {
    double* col = data + static_cast<std::ptrdiff_t>(j) * nx;
    const double* cs = col - nx;
    const double* cn = col + nx;
    const std::int16_t* oc = own + static_cast<std::ptrdiff_t>(j) * nx;
    for (int i = 1 + ((1 + j + color) & 1); i < nx - 1; i += 2) {
      if (oc[i] != kFree) continue;
      const double nb = col[i - 1] + col[i + 1] + cs[i] + cn[i];
      col[i] += omega * (0.25 * nb - col[i]);
    }
  }
}

void sweep_color_eps(Array2d& phi, const Array2<std::int16_t>& owner, const Stencil& st,
                     double omega, int color) {
  const int nx = static_cast<int>(phi.rows());
  const int ny = static_cast<int>(phi.cols());
  double* data = phi.data();
  const std::int16_t* own = owner.data();
  const double* wx = st.wx.data();
  const double* wy = st.wy.data();
  const double* inv = st.inv_sum.data();
#pragma omp parallel for schedule(static)
  for (int j = 1; j < ny - 1; ++j) {
    const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(j) * nx;
    double* col = data + off;
    const double* cs = col - nx;
    const double* cn = col + nx;
    const std::int16_t* oc = own + off;
    const double* wxc = wx + off;
    const double* wyc = wy + off;
    const double* wys = wyc - nx;
    const double* invc = inv + off;
    for (int i = 1 + ((1 + j + color) & 1); i < nx - 1; i += 2) {
      if (oc[i] != kFree) continue;
      const double nb = wxc[i - 1] * col[i - 1] + wxc[i] * col[i + 1] + wys[i] * cs[i] +
                        wyc[i] * cn[i];
      col[i] += omega * (nb * invc[i] - col[i]);
    }
  }
}

// Max-norm Jacobi residual of the frozen field (the convergence metric).
double max_residual(const Array2d& phi, const Array2<std::int16_t>& owner,
                    const Stencil& st) {
  const int nx = static_cast<int>(phi.rows());
  const int ny = static_cast<int>(phi.cols());
  const double* data = phi.data();
  const std::int16_t* own = owner.data();
  double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst)
  for (int j = 1; j < ny - 1; ++j) {
    const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(j) * nx;
    const double* col = data + off;
    const double* cs = col - nx;
    const double* cn = col + nx;
    const std::int16_t* oc = own + off;
    if (st.vacuum) {
      for (int i = 1; i < nx - 1; ++i) {
        if (oc[i] != kFree) continue;
        const double r = 0.25 * (col[i - 1] + col[i + 1] + cs[i] + cn[i]) - col[i];
        worst = std::max(worst, std::abs(r));
      }
    } else {
      const double* wxc = st.wx.data() + off;
      const double* wyc = st.wy.data() + off;
      const double* wys = wyc - nx;
      const double* invc = st.inv_sum.data() + off;
      for (int i = 1; i < nx - 1; ++i) {
        if (oc[i] != kFree) continue;
        const double nb = wxc[i - 1] * col[i - 1] + wxc[i] * col[i + 1] + wys[i] * cs[i] +
                          wyc[i] * cn[i];
        worst = std::max(worst, std::abs(nb * invc[i] - col[i]));
      }
    }
  }
  return worst;
}

double sor_omega(int nx, int ny) {
  return 2.0 / (1.0 + std::sin(kPi / std::max(nx, ny)));
}

long sweep_cap(const Grid& grid, const SolverOptions& options) {
  if (options.max_sweeps > 0) return options.max_sweeps;
  const long n = std::max(grid.nx, grid.ny);
  return 50L * n * n;
}

// Relax until the residual target is met or the sweep budget is exhausted.
SolveStats relax(Array2d& phi, const Array2<std::int16_t>& owner, const Stencil& st,
                 double omega, double tol_abs, long budget, int check_every = 8) {
  SolveStats out;
  double res = max_residual(phi, owner, st);
  while (out.sweeps < budget && res > tol_abs) {
    const long chunk = std::min<long>(check_every, budget - out.sweeps);
    for (long k = 0; k < chunk; ++k) {
      if (st.vacuum) {
        sweep_color_vacuum(phi, owner, omega, 0);
        sweep_color_vacuum(phi, owner, omega, 1);
      } else {
        sweep_color_eps(phi, owner, st, omega, 0);
        sweep_color_eps(phi, owner, st, omega, 1);
      }
    }
    out.sweeps += chunk;
    res = max_residual(phi, owner, st);
  }
  out.residual = res;
  out.converged = res <= tol_abs;
  return out;
}

struct Level {
  Grid grid;
  Array2<std::int16_t> owner;
  Stencil stencil;
  double omega = 1.0;
};

// Level 0 is the finest.  Coarser levels double h over the same span; their
// permittivity is nearest-node sampled from the fine map.
std::vector<Level> build_levels(const CrossSectionGeometry& g, const Grid& fine,
                                const ElectrodeMask& fine_mask, const DielectricMap& eps,
                                const SolverOptions& options) {
  std::vector<Level> levels;
  levels.push_back({fine, fine_mask.owner, build_stencil(eps, fine.nx, fine.ny),
                    sor_omega(fine.nx, fine.ny)});
  if (!options.cascade) return levels;
  Grid prev = fine;
  while (std::min(prev.nx, prev.ny) / 2 >= options.cascade_min_dim) {
    Grid coarse;
    coarse.h = prev.h * 2.0;
    coarse.nx = (prev.nx + 1) / 2;
    coarse.ny = (prev.ny + 1) / 2;
    coarse.origin = prev.origin;
    if (coarse.nx < 16 || coarse.ny < 16) break;
    DielectricMap ceps;
    if (!eps.is_vacuum()) {
      ceps.eps.resize(coarse.nx, coarse.ny);
      for (int j = 0; j < coarse.ny; ++j) {
        for (int i = 0; i < coarse.nx; ++i) {
          const int si = std::min(fine.nx - 1, fine.nearest_i(coarse.x(i)));
          const int sj = std::min(fine.ny - 1, fine.nearest_j(coarse.y(j)));
          ceps.eps(i, j) = eps.eps(si, sj);
        }
      }
    }
    levels.push_back({coarse, rasterize_raw(g, coarse), build_stencil(ceps, coarse.nx, coarse.ny),
                      sor_omega(coarse.nx, coarse.ny)});
    prev = coarse;
  }
  return levels;
}

Array2d cascade_solve(const std::vector<Level>& levels, const std::vector<double>& voltages,
                      const SolverOptions& options, double tol_abs, SolveStats* stats) {
  // Coarsest level: relax from scratch.
  const Level& bottom = levels.back();
  Array2d phi(bottom.grid.nx, bottom.grid.ny);
  phi.setZero();
  apply_dirichlet(phi, bottom.owner, voltages);
  const long bottom_budget = sweep_cap(bottom.grid, options);
  const SolveStats bottom_stats =
      relax(phi, bottom.owner, bottom.stencil, bottom.omega, tol_abs, bottom_budget);
  if (levels.size() == 1 && stats) *stats = bottom_stats;

  // Walk up: prolong as initial guess, smooth, and at the finest level relax
  // to the residual target.
  for (int li = static_cast<int>(levels.size()) - 2; li >= 0; --li) {
    const Level& lvl = levels[li];
    const Level& below = levels[li + 1];
    Array2d up(lvl.grid.nx, lvl.grid.ny);
    for (int j = 0; j < lvl.grid.ny; ++j) {
      const double gy = (lvl.grid.y(j) - below.grid.origin.y()) / below.grid.h;
      const int j0 = std::clamp(static_cast<int>(std::floor(gy)), 0, below.grid.ny - 2);
      const double ty = std::clamp(gy - j0, 0.0, 1.0);
      for (int i = 0; i < lvl.grid.nx; ++i) {
        const double gx = (lvl.grid.x(i) - below.grid.origin.x()) / below.grid.h;
        const int i0 = std::clamp(static_cast<int>(std::floor(gx)), 0, below.grid.nx - 2);
        const double tx = std::clamp(gx - i0, 0.0, 1.0);
        const double v00 = phi(i0, j0), v10 = phi(i0 + 1, j0);
        const double v01 = phi(i0, j0 + 1), v11 = phi(i0 + 1, j0 + 1);
        up(i, j) = (1 - ty) * ((1 - tx) * v00 + tx * v10) + ty * ((1 - tx) * v01 + tx * v11);
      }
    }
    apply_dirichlet(up, lvl.owner, voltages);
    phi.swap(up);
    const bool finest = li == 0;
    const long budget = finest ? sweep_cap(lvl.grid, options)
                               : static_cast<long>(options.cascade_level_sweeps);
    const SolveStats s = relax(phi, lvl.owner, lvl.stencil, lvl.omega, tol_abs, budget);
    if (finest && stats) *stats = s;
  }
  return phi;
}

void check_options(const SolverOptions& options) {
  if (!(options.tol > 0.0) || !(options.tol < 1e-3))
    throw input_error("solver tol must be in (0, 1e-3)");
}

double voltage_scale(const std::vector<double>& voltages) {
  double m = 1.0;
  for (double v : voltages) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

DielectricMap make_vacuum() { return DielectricMap{}; }

DielectricMap make_substrate(const Grid& grid, double surface_y, double eps_r) {
  if (!(eps_r >= 1.0)) throw input_error("relative permittivity must be >= 1");
  DielectricMap map;
  map.eps.resize(grid.nx, grid.ny);
  for (int j = 0; j < grid.ny; ++j) {
    const double value = grid.y(j) < surface_y ? eps_r : 1.0;
    for (int i = 0; i < grid.nx; ++i) map.eps(i, j) = value;
  }
  map.solid_below_y = surface_y;
  map.description = "substrate below y=" + std::to_string(surface_y) +
                    " with eps_r=" + std::to_string(eps_r);
  return map;
}

ElectrodeMask rasterize_electrodes(const CrossSectionGeometry& g, const Grid& grid) {
  for (std::size_t e = 0; e < g.electrodes.size(); ++e) {
    const ElectrodeShape& shape = g.electrodes[e].shape;
    double thinnest = 0.0;
    if (const Disc* d = std::get_if<Disc>(&shape)) {
      thinnest = 2.0 * d->radius;
    } else if (const Rectangle* r = std::get_if<Rectangle>(&shape)) {
      thinnest = std::min(r->width, r->height);
    } else {
      thinnest = std::get<HalfSlab>(shape).thickness;
    }
    if (thinnest < 2.0 * grid.h)
      throw input_error("grid too coarse: electrode " + std::to_string(e + 1) +
                        " is thinner than 2 cells (" + std::to_string(thinnest) + " m < 2*" +
                        std::to_string(grid.h) + " m); refine h");
  }
  ElectrodeMask mask;
  mask.owner = rasterize_raw(g, grid);
  std::vector<long> cells(g.electrodes.size(), 0);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      if (mask.owner(i, j) >= 0) ++cells[static_cast<std::size_t>(mask.owner(i, j))];
  for (std::size_t e = 0; e < cells.size(); ++e) {
    if (cells[e] == 0)
      throw input_error("electrode " + std::to_string(e + 1) +
                        " rasterized to zero cells; refine h or enlarge the grid");
  }
  return mask;
}

PotentialBasis solve_basis(const CrossSectionGeometry& g, const Grid& grid,
                           const DielectricMap& eps, const SolverOptions& options) {
  check_options(options);
  PotentialBasis basis;
  basis.grid = grid;
  basis.mask = rasterize_electrodes(g, grid);
  const std::vector<Level> levels = build_levels(g, grid, basis.mask, eps, options);
  basis.phi.reserve(g.electrodes.size());
  basis.stats.reserve(g.electrodes.size());
  for (std::size_t e = 0; e < g.electrodes.size(); ++e) {
    std::vector<double> voltages(g.electrodes.size(), 0.0);
    voltages[e] = 1.0;
    SolveStats stats;
    basis.phi.push_back(cascade_solve(levels, voltages, options, options.tol, &stats));
    basis.stats.push_back(stats);
  }
  return basis;
}

Array2d solve_pattern(const CrossSectionGeometry& g, const Grid& grid,
                      const DielectricMap& eps, const std::vector<double>& voltages,
                      const SolverOptions& options, SolveStats* stats) {
  check_options(options);
  if (voltages.size() != g.electrodes.size())
    throw input_error("voltage vector size " + std::to_string(voltages.size()) +
                      " does not match electrode count " + std::to_string(g.electrodes.size()));
  const ElectrodeMask mask = rasterize_electrodes(g, grid);
  const std::vector<Level> levels = build_levels(g, grid, mask, eps, options);
  const double tol_abs = options.tol * voltage_scale(voltages);
  SolveStats local;
  Array2d phi = cascade_solve(levels, voltages, options, tol_abs, &local);
  if (stats) *stats = local;
  return phi;
}

Array2d superpose(const PotentialBasis& basis, const std::vector<double>& voltages) {
  if (voltages.size() != basis.phi.size())
    throw input_error("voltage entries (" + std::to_string(voltages.size()) +
                      ") do not cover every electrode (" + std::to_string(basis.phi.size()) + ")");
  Array2d out(basis.grid.nx, basis.grid.ny);
  out.setZero();
  for (std::size_t e = 0; e < voltages.size(); ++e) {
    if (voltages[e] != 0.0) out += voltages[e] * basis.phi[e];
  }
  return out;
}

std::vector<double> electrode_voltages(const CrossSectionGeometry& g, double rf_volts,
                                       const StaticConfig& statics) {
  std::vector<double> v(g.electrodes.size(), 0.0);
  for (std::size_t e = 0; e < g.electrodes.size(); ++e) {
    const Role& role = g.electrodes[e].role;
    if (role.kind == RoleKind::kRf) {
      v[e] = rf_volts;
    } else if (role.kind == RoleKind::kControl) {
      v[e] = statics.voltage(role.control_index);
    }
  }
  return v;
}

FieldMap field_of(const Array2d& phi, const Grid& grid, const ElectrodeMask& mask) {
  FieldMap map;
  map.grid = grid;
  map.ex.setZero(grid.nx, grid.ny);
  map.ey.setZero(grid.nx, grid.ny);
  const double inv2h = 1.0 / (2.0 * grid.h);
  const double invh = 1.0 / grid.h;
  const auto metal = [&](int i, int j) { return mask.owner(i, j) >= 0; };
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      if (metal(i, j)) continue;
      // d/dx
      {
        const bool left = i > 0 && !metal(i - 1, j);
        const bool right = i + 1 < grid.nx && !metal(i + 1, j);
        double d = 0.0;
        if (left && right) {
          d = (phi(i + 1, j) - phi(i - 1, j)) * inv2h;
        } else if (right) {
          d = (i + 2 < grid.nx && !metal(i + 2, j))
                  ? (-3.0 * phi(i, j) + 4.0 * phi(i + 1, j) - phi(i + 2, j)) * inv2h
                  : (phi(i + 1, j) - phi(i, j)) * invh;
        } else if (left) {
          d = (i - 2 >= 0 && !metal(i - 2, j))
                  ? (3.0 * phi(i, j) - 4.0 * phi(i - 1, j) + phi(i - 2, j)) * inv2h
                  : (phi(i, j) - phi(i - 1, j)) * invh;
        }
        map.ex(i, j) = -d;
      }
      // d/dy
      {
        const bool down = j > 0 && !metal(i, j - 1);
        const bool up = j + 1 < grid.ny && !metal(i, j + 1);
        double d = 0.0;
        if (down && up) {
          d = (phi(i, j + 1) - phi(i, j - 1)) * inv2h;
        } else if (up) {
          d = (j + 2 < grid.ny && !metal(i, j + 2))
                  ? (-3.0 * phi(i, j) + 4.0 * phi(i, j + 1) - phi(i, j + 2)) * inv2h
                  : (phi(i, j + 1) - phi(i, j)) * invh;
        } else if (down) {
          d = (j - 2 >= 0 && !metal(i, j - 2))
                  ? (3.0 * phi(i, j) - 4.0 * phi(i, j - 1) + phi(i, j - 2)) * inv2h
                  : (phi(i, j) - phi(i, j - 1)) * invh;
        }
        map.ey(i, j) = -d;
      }
    }
  }
  return map;
}

ResidualReport residual_check(const Array2d& phi, const Grid& grid, const DielectricMap& eps,
                              const ElectrodeMask& mask) {
  const Stencil st = build_stencil(eps, grid.nx, grid.ny);
  ResidualReport report;
  double sum_sq = 0.0;
  long count = 0;
  for (int j = 1; j < grid.ny - 1; ++j) {
    for (int i = 1; i < grid.nx - 1; ++i) {
      if (mask.owner(i, j) != kFree) continue;
      double r;
      if (st.vacuum) {
        r = 0.25 * (phi(i - 1, j) + phi(i + 1, j) + phi(i, j - 1) + phi(i, j + 1)) - phi(i, j);
      } else {
        const double nb = st.wx(i - 1, j) * phi(i - 1, j) + st.wx(i, j) * phi(i + 1, j) +
                          st.wy(i, j - 1) * phi(i, j - 1) + st.wy(i, j) * phi(i, j + 1);
        r = nb * st.inv_sum(i, j) - phi(i, j);
      }
      report.max_residual = std::max(report.max_residual, std::abs(r));
      sum_sq += r * r;
      ++count;
    }
  }
  report.rms_residual = count > 0 ? std::sqrt(sum_sq / count) : 0.0;
  return report;
}

std::vector<ResidualReport> residual_check(const PotentialBasis& basis,
                                           const DielectricMap& eps) {
  std::vector<ResidualReport> out;
  out.reserve(basis.phi.size());
  for (const Array2d& phi : basis.phi)
    out.push_back(residual_check(phi, basis.grid, eps, basis.mask));
  return out;
}

double enclosed_charge(const Array2d& phi, const Grid& grid, const DielectricMap& eps,
                       const BoundingBox& box) {
  const int i0 = std::max(1, grid.nearest_i(box.xmin));
  const int i1 = std::min(grid.nx - 2, grid.nearest_i(box.xmax));
  const int j0 = std::max(1, grid.nearest_j(box.ymin));
  const int j1 = std::min(grid.ny - 2, grid.nearest_j(box.ymax));
  if (i0 >= i1 || j0 >= j1) throw input_error("Gauss box collapses on this grid");

  const auto face_eps_x = [&](int i, int j) {
    // face between (i,j) and (i+1,j)
    const double a = eps.at(i, j), b = eps.at(i + 1, j);
    return 2.0 * a * b / (a + b);
  };
  const auto face_eps_y = [&](int i, int j) {
    const double a = eps.at(i, j), b = eps.at(i, j + 1);
    return 2.0 * a * b / (a + b);
  };

  double flux = 0.0;  // sum of eps_face * (phi_in - phi_out); h cancels in 2D
  for (int j = j0; j <= j1; ++j) {
    flux += face_eps_x(i1, j) * (phi(i1, j) - phi(i1 + 1, j));   // right
    flux += face_eps_x(i0 - 1, j) * (phi(i0, j) - phi(i0 - 1, j));  // left
  }
  for (int i = i0; i <= i1; ++i) {
    flux += face_eps_y(i, j1) * (phi(i, j1) - phi(i, j1 + 1));   // top
    flux += face_eps_y(i, j0 - 1) * (phi(i, j0) - phi(i, j0 - 1));  // bottom
  }
  return kEpsilon0 * flux;
}

Eigen::MatrixXd charge_coupling_matrix(const CrossSectionGeometry& g,
                                       const PotentialBasis& basis, const DielectricMap& eps,
                                       int pad) {
  const Grid& grid = basis.grid;
  const int n = static_cast<int>(g.electrodes.size());
  std::vector<BoundingBox> boxes;
  boxes.reserve(g.electrodes.size());
  for (const Electrode& e : g.electrodes) {
    BoundingBox b = bounding_box(e.shape);
    b.xmin -= pad * grid.h;
    b.xmax += pad * grid.h;
    b.ymin -= pad * grid.h;
    b.ymax += pad * grid.h;
    boxes.push_back(b);
  }
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const bool overlap = boxes[a].xmin < boxes[b].xmax && boxes[b].xmin < boxes[a].xmax &&
                           boxes[a].ymin < boxes[b].ymax && boxes[b].ymin < boxes[a].ymax;
      if (overlap)
        throw input_error("Gauss boxes of electrodes " + std::to_string(a + 1) + " and " +
                          std::to_string(b + 1) + " overlap; reduce pad or separate electrodes");
    }
  }
  Eigen::MatrixXd c(n, n);
  for (int e = 0; e < n; ++e)
    for (int b = 0; b < n; ++b)
      c(e, b) = enclosed_charge(basis.phi[static_cast<std::size_t>(b)], grid, eps, boxes[e]);
  return c;
}

}  // namespace iontrap
