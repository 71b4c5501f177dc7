#include "iontrap/pseudo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>

#include <Eigen/Dense>

#include "iontrap/constants.hpp"
#include "iontrap/errors.hpp"
#include "iontrap/interp.hpp"
#include "iontrap/spectrum.hpp"

namespace iontrap {
namespace {

constexpr std::int16_t kFree = ElectrodeMask::kFree;
constexpr std::int16_t kBoundary = ElectrodeMask::kBoundary;

double angle_in_half_turn(const Vec2& v) {
  double deg = std::atan2(v.y(), v.x()) * 180.0 / kPi;
  while (deg > 90.0) deg -= 180.0;
  while (deg <= -90.0) deg += 180.0;
  return deg;
}

double value_range(const Array2d& a) {
  return a.maxCoeff() - a.minCoeff();
}

// Gradient tolerance scaled to the surface: a fraction of the mean slope
// over the characteristic length.
double gradient_tolerance(const Array2d& u, double char_len) {
  const double range = value_range(u);
  return std::max(1e-11 * range / char_len, 1e-300);
}

double characteristic_length(const PseudoField& pseudo) {
  if (pseudo.d > 0.0) return pseudo.d;
  return 0.1 * std::min(pseudo.grid.xmax() - pseudo.grid.origin.x(),
                        pseudo.grid.ymax() - pseudo.grid.origin.y());
}

// Seed candidates for the minimum search: free cells near the electrodes
// (within `reach` of their bounding box) that are 4-neighbor local minima of
// `total`, lowest values first.  Cells in the decaying far field are never
// local minima, so this keeps Newton away from the grid edges.
std::vector<Vec2> minimum_seeds(const Array2d& total, const Grid& grid,
                                const ElectrodeMask& mask, const BoundingBox& hull,
                                double reach, std::size_t count) {
  std::vector<std::pair<double, Vec2>> cells;
  for (int j = 2; j < grid.ny - 2; ++j) {
    const double y = grid.y(j);
    if (y < hull.ymin - reach || y > hull.ymax + reach) continue;
    for (int i = 2; i < grid.nx - 2; ++i) {
      if (mask.owner(i, j) != kFree) continue;
      const double x = grid.x(i);
      if (x < hull.xmin - reach || x > hull.xmax + reach) continue;
      const double v = total(i, j);
      if (v <= total(i - 1, j) && v <= total(i + 1, j) && v <= total(i, j - 1) &&
          v <= total(i, j + 1))
        cells.push_back({v, grid.point(i, j)});
    }
  }
  if (cells.empty())
    throw physics_error("no local minimum cells near the electrodes to seed the search");
  std::sort(cells.begin(), cells.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Vec2> seeds;
  for (std::size_t k = 0; k < cells.size() && k < count; ++k) seeds.push_back(cells[k].second);
  return seeds;
}

BoundingBox electrode_hull(const ElectrodeMask& mask, const Grid& grid) {
  BoundingBox box{std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity()};
  bool any = false;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      if (mask.owner(i, j) < 0) continue;
      any = true;
      box.xmin = std::min(box.xmin, grid.x(i));
      box.xmax = std::max(box.xmax, grid.x(i));
      box.ymin = std::min(box.ymin, grid.y(j));
      box.ymax = std::max(box.ymax, grid.y(j));
    }
  }
  if (!any) throw physics_error("mask contains no electrode cells");
  return box;
}

// An ion is lost when it reaches the grid edge, an electrode surface, or the
// substrate solid; all three terminate basin searches identically.
bool is_loss_node(const PseudoField& pseudo, int i, int j) {
  if (pseudo.mask.owner(i, j) != kFree) return true;
  return pseudo.solid_below_y && pseudo.grid.y(j) < *pseudo.solid_below_y;
}

// Breadth-first flood from `start` over free cells with u < level; reports
// whether the flood touches a loss surface.
bool flood_escapes(const PseudoField& pseudo, int si, int sj, double level) {
  const Grid& grid = pseudo.grid;
  const Array2d& u = pseudo.u;
  if (u(si, sj) >= level || is_loss_node(pseudo, si, sj)) return false;
  Array2<std::uint8_t> seen(grid.nx, grid.ny);
  seen.setZero();
  std::vector<std::pair<int, int>> stack{{si, sj}};
  seen(si, sj) = 1;
  while (!stack.empty()) {
    const auto [i, j] = stack.back();
    stack.pop_back();
    static constexpr int di[4] = {1, -1, 0, 0};
    static constexpr int dj[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int ni = i + di[k], nj = j + dj[k];
      if (ni < 0 || nj < 0 || ni >= grid.nx || nj >= grid.ny || seen(ni, nj)) continue;
      seen(ni, nj) = 1;
      if (is_loss_node(pseudo, ni, nj)) return true;
      if (u(ni, nj) >= level) continue;
      stack.push_back({ni, nj});
    }
  }
  return false;
}

// Minimax level at which the basin of `start` first touches a loss surface:
// Dijkstra where a path's cost is the highest u along it.
struct GridLimitedEscape {
  double level = 0.0;
  Vec2 point = Vec2::Zero();
};

GridLimitedEscape minimax_escape(const PseudoField& pseudo, int si, int sj) {
  const Grid& grid = pseudo.grid;
  const Array2d& u = pseudo.u;
  struct Node {
    double key;
    int i, j;
    bool operator>(const Node& o) const { return key > o.key; }
  };
  Array2<std::uint8_t> done(grid.nx, grid.ny);
  done.setZero();
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> queue;
  queue.push({u(si, sj), si, sj});
  while (!queue.empty()) {
    const Node n = queue.top();
    queue.pop();
    if (done(n.i, n.j)) continue;
    done(n.i, n.j) = 1;
    static constexpr int di[4] = {1, -1, 0, 0};
    static constexpr int dj[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int ni = n.i + di[k], nj = n.j + dj[k];
      if (ni < 0 || nj < 0 || ni >= grid.nx || nj >= grid.ny || done(ni, nj)) continue;
      if (is_loss_node(pseudo, ni, nj)) return {n.key, grid.point(n.i, n.j)};
      queue.push({std::max(n.key, u(ni, nj)), ni, nj});
    }
  }
  throw physics_error("basin flood never reached the grid boundary");
}

}  // namespace

PseudoField pseudopotential_field(const FieldMap& rf_field, const ElectrodeMask& mask,
                                  const Species& species, const DriveConfig& drive,
                                  std::optional<double> solid_below_y) {
  if (!(species.mass > 0.0)) throw input_error("species mass must be positive");
  if (species.charge == 0.0) throw input_error("species charge must be nonzero");
  if (!(drive.omega > 0.0)) throw input_error("drive frequency must be positive");
  PseudoField out;
  out.grid = rf_field.grid;
  out.mask = mask;
  out.species = species;
  out.drive = drive;
  out.solid_below_y = solid_below_y;
  const double scale =
      species.charge * species.charge / (4.0 * species.mass * drive.omega * drive.omega);
  out.u = scale * (rf_field.ex.square() + rf_field.ey.square());
  return out;
}

TrapDepthResult trap_depth(const PseudoField& pseudo, const Vec2& r_min) {
  const Grid& grid = pseudo.grid;
  const Bicubic<double> f(grid, pseudo.u);
  const double gtol = gradient_tolerance(pseudo.u, characteristic_length(pseudo));

  const NewtonResult bottom = minimize_bicubic(f, r_min, gtol);
  if (!bottom.converged) throw physics_error("trap minimum did not refine to a stationary point");
  const double u_min = bottom.value;
  const double range = value_range(pseudo.u);

  // Stationary-point sweep from every 5th free node.
  std::vector<NewtonResult> candidates;
  for (int j = 2; j < grid.ny - 2; j += 5) {
    for (int i = 2; i < grid.nx - 2; i += 5) {
      if (pseudo.mask.owner(i, j) != kFree) continue;
      const NewtonResult s = stationary_bicubic(f, grid.point(i, j), gtol, 40);
      if (!s.converged) continue;
      if (s.value <= u_min + 1e-12 * range) continue;
      const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(s.hessian);
      const double l0 = eig.eigenvalues()(0), l1 = eig.eigenvalues()(1);
      const double tau = 1e-7 * std::max(std::abs(l0), std::abs(l1));
      if (l0 > tau) continue;  // another minimum, not a barrier
      bool merged = false;
      for (NewtonResult& q : candidates) {
        if ((q.point - s.point).norm() < 0.5 * grid.h) {
          if (s.grad_norm < q.grad_norm) q = s;
          merged = true;
          break;
        }
      }
      if (!merged) candidates.push_back(s);
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const NewtonResult& a, const NewtonResult& b) { return a.value < b.value; });

  const int si = grid.nearest_i(bottom.point.x());
  const int sj = grid.nearest_j(bottom.point.y());
  TrapDepthResult out;
  for (const NewtonResult& s : candidates) {
    const double level = s.value + 1e-9 * range;
    if (flood_escapes(pseudo, si, sj, level)) {
      out.depth_ev = (s.value - u_min) / kElementaryCharge;
      out.escape_point = s.point;
      out.grid_limited = false;
      return out;
    }
  }

  const GridLimitedEscape esc = minimax_escape(pseudo, si, sj);
  out.depth_ev = (esc.level - u_min) / kElementaryCharge;
  out.escape_point = esc.point;
  out.grid_limited = true;
  return out;
}

TrapCharacterization characterize(const PseudoField& pseudo, const Array2d& phi_static) {
  const Grid& grid = pseudo.grid;
  const bool has_static = phi_static.size() > 0;
  if (has_static && (phi_static.rows() != grid.nx || phi_static.cols() != grid.ny))
    throw input_error("static potential array does not match the pseudopotential grid");
  if (!(pseudo.drive.omega > 0.0)) throw input_error("drive frequency must be positive");

  const double char_len = characteristic_length(pseudo);
  const BoundingBox hull = electrode_hull(pseudo.mask, grid);

  const auto interior = [&](const Vec2& p) {
    // A minimum pinned against the search box is not an interior minimum.
    return p.x() > grid.x(1) + 1.01 * grid.h && p.x() < grid.x(grid.nx - 2) - 1.01 * grid.h &&
           p.y() > grid.y(1) + 1.01 * grid.h && p.y() < grid.y(grid.ny - 2) - 1.01 * grid.h;
  };

  // Candidate RF nulls: converge every seed, keep distinct interior minima
  // outside the substrate solid.  Fringe fields can have genuine but
  // insignificant |E|^2 minima past the electrode edges, so the trap minimum
  // is identified as the deepest well, not the first or the lowest one.  For
  // a free-standing strip array (no substrate) the mirror well below the
  // plane ties the trap well exactly; ties resolve to the upper well.
  const Bicubic<double> rf_only(grid, pseudo.u);
  std::vector<NewtonResult> candidates;
  for (const Vec2& seed : minimum_seeds(pseudo.u, grid, pseudo.mask, hull, 3.0 * char_len, 8)) {
    const NewtonResult m = minimize_bicubic(rf_only, seed, gradient_tolerance(pseudo.u, char_len));
    if (!m.converged) continue;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(m.hessian);
    if (!(eig.eigenvalues()(0) > 0.0)) continue;
    if (!interior(m.point)) continue;
    // Quarter-cell slack: a minimum exactly on the substrate top (in-plane
    // traps) must not be rejected over the sign of a rounding error.
    if (pseudo.solid_below_y && m.point.y() < *pseudo.solid_below_y - 0.25 * grid.h) continue;
    bool duplicate = false;
    for (const NewtonResult& c : candidates)
      if ((c.point - m.point).norm() < 0.5 * grid.h) duplicate = true;
    if (!duplicate) candidates.push_back(m);
  }
  if (candidates.empty())
    throw physics_error("no interior minimum of the pseudopotential: every seed either failed "
                        "to converge, reached a saddle, or ran into the grid edge");

  NewtonResult rf_m = candidates.front();
  TrapDepthResult depth = trap_depth(pseudo, rf_m.point);
  for (std::size_t c = 1; c < candidates.size(); ++c) {
    const TrapDepthResult dep = trap_depth(pseudo, candidates[c].point);
    const double tie = 1e-9 * std::max(std::abs(dep.depth_ev), std::abs(depth.depth_ev));
    const bool deeper = dep.depth_ev > depth.depth_ev + tie;
    const bool tied_above = std::abs(dep.depth_ev - depth.depth_ev) <= tie &&
                            candidates[c].point.y() > rf_m.point.y();
    if (deeper || tied_above) {
      depth = dep;
      rf_m = candidates[c];
    }
  }

  // Static fields shift the total-potential minimum away from the RF null.
  NewtonResult m = rf_m;
  Array2d total;
  std::optional<Bicubic<double>> total_interp;
  if (has_static) {
    total = pseudo.u + pseudo.species.charge * phi_static;
    total_interp.emplace(grid, total);
    m = minimize_bicubic(*total_interp, rf_m.point, gradient_tolerance(total, char_len));
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(m.hessian);
    if (!m.converged || !(eig.eigenvalues()(0) > 0.0) || !interior(m.point))
      throw physics_error("static potential destroys the trap minimum: no interior minimum of "
                          "the total potential near the RF null");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(m.hessian);

  TrapCharacterization tc;
  tc.r_min = m.point;
  tc.hessian = m.hessian;
  for (int i = 0; i < 2; ++i) {
    tc.secular_frequencies[static_cast<std::size_t>(i)] =
        std::sqrt(eig.eigenvalues()(i) / pseudo.species.mass);
    tc.principal_axes[static_cast<std::size_t>(i)] = angle_in_half_turn(eig.eigenvectors().col(i));
  }

  // Stability parameters from the RF-only curvature at the RF null.
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> rf_eig(rf_m.hessian);
  const double w_lo = std::sqrt(std::max(rf_eig.eigenvalues()(0), 0.0) / pseudo.species.mass);
  const double w_hi = std::sqrt(std::max(rf_eig.eigenvalues()(1), 0.0) / pseudo.species.mass);
  const double k = 2.0 * std::sqrt(2.0) / pseudo.drive.omega;
  tc.q_params = {k * w_hi, -k * w_lo};  // positive entry on the stiffer RF axis

  tc.depth_ev = depth.depth_ev;
  tc.escape_point = depth.escape_point;
  tc.depth_grid_limited = depth.grid_limited;

  tc.normalized_f = std::numeric_limits<double>::quiet_NaN();
  tc.normalized_u = std::numeric_limits<double>::quiet_NaN();
  tc.species = pseudo.species;
  tc.drive = pseudo.drive;
  tc.d = pseudo.d;
  tc.geometry_label = pseudo.geometry_label;
  return tc;
}

std::vector<StationaryPoint> stationary_census(const PseudoField& pseudo,
                                               const BoundingBox& region) {
  if (!(region.xmin < region.xmax) || !(region.ymin < region.ymax))
    throw input_error("census region is empty");
  const Grid& grid = pseudo.grid;
  const Bicubic<double> f(grid, pseudo.u);
  const double gtol = gradient_tolerance(pseudo.u, characteristic_length(pseudo));

  const auto inside = [&](const Vec2& p) {
    if (p.x() < region.xmin || p.x() > region.xmax) return false;
    if (p.y() < region.ymin || p.y() > region.ymax) return false;
    return !(pseudo.solid_below_y && p.y() < *pseudo.solid_below_y);
  };

  std::vector<NewtonResult> found;
  for (int j = 2; j < grid.ny - 2; j += 5) {
    if (grid.y(j) < region.ymin || grid.y(j) > region.ymax) continue;
    for (int i = 2; i < grid.nx - 2; i += 5) {
      if (pseudo.mask.owner(i, j) != kFree) continue;
      if (grid.x(i) < region.xmin || grid.x(i) > region.xmax) continue;
      const NewtonResult s = stationary_bicubic(f, grid.point(i, j), gtol, 40);
      if (!s.converged || !inside(s.point)) continue;
      bool merged = false;
      for (NewtonResult& q : found) {
        if ((q.point - s.point).norm() < 0.5 * grid.h) {
          if (s.grad_norm < q.grad_norm) q = s;
          merged = true;
          break;
        }
      }
      if (!merged) found.push_back(s);
    }
  }

  std::vector<StationaryPoint> out;
  out.reserve(found.size());
  for (const NewtonResult& s : found) {
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(s.hessian);
    const double l0 = eig.eigenvalues()(0), l1 = eig.eigenvalues()(1);
    const double tau = 1e-7 * std::max(std::abs(l0), std::abs(l1));
    StationaryPoint p;
    p.r = s.point;
    p.value = s.value;
    p.positive_axes = (l0 > tau ? 1 : 0) + (l1 > tau ? 1 : 0);
    out.push_back(p);
  }
  std::sort(out.begin(), out.end(),
            [](const StationaryPoint& a, const StationaryPoint& b) { return a.value < b.value; });
  return out;
}

std::pair<double, double> compare_to_reference(TrapCharacterization& tc,
                                               const TrapCharacterization& baseline) {
  const auto close = [](double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max({std::abs(a), std::abs(b), 1e-300});
  };
  if (!close(tc.species.mass, baseline.species.mass) ||
      !close(tc.species.charge, baseline.species.charge))
    throw input_error("species metadata differs between characterizations");
  if (!close(tc.drive.v0, baseline.drive.v0) || !close(tc.drive.omega, baseline.drive.omega))
    throw input_error("drive metadata differs between characterizations");
  if (!close(tc.d, baseline.d))
    throw input_error("geometric scale d differs between characterizations");

  const double f = std::sqrt(tc.secular_frequencies[0] * tc.secular_frequencies[1]);
  const double fb = std::sqrt(baseline.secular_frequencies[0] * baseline.secular_frequencies[1]);
  if (!(fb > 0.0) || !(baseline.depth_ev > 0.0))
    throw input_error("baseline characterization has no usable frequency or depth");
  tc.normalized_f = f / fb;
  tc.normalized_u = tc.depth_ev / baseline.depth_ev;
  return {tc.normalized_f, tc.normalized_u};
}

double micromotion_ratio(const Trajectory& traj) {
  if (traj.t.size() < 64) throw input_error("trajectory too short for spectral analysis");
  if (!(traj.drive.omega > 0.0)) throw input_error("trajectory lacks drive metadata");
  const double f_drive = traj.drive.omega / (2.0 * kPi);

  std::vector<double> series[2] = {traj.x, traj.y};
  SpectralPeak best_secular;
  AmplitudeSpectrum best_spectrum;
  for (auto& s : series) {
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    for (double& v : s) v -= mean;
    AmplitudeSpectrum spec = amplitude_spectrum(s, traj.dt);
    const SpectralPeak peak =
        dominant_peak(spec, 2.0 * spec.bin_width, 0.45 * f_drive);
    if (peak.found && (!best_secular.found || peak.amplitude > best_secular.amplitude)) {
      best_secular = peak;
      best_spectrum = std::move(spec);
    }
  }
  if (!best_secular.found || best_secular.amplitude < 1e-13)
    throw physics_error("no resolvable secular peak: trajectory sits on the trap axis");
  const double duration = traj.t.back() - traj.t.front();
  if (duration * best_secular.frequency < 20.0)
    throw input_error("trajectory spans fewer than 20 secular periods");

  const double window = std::max(4.0 * best_spectrum.bin_width, 0.05 * best_secular.frequency);
  const SpectralPeak lower = dominant_peak(best_spectrum, f_drive - best_secular.frequency - window,
                                           f_drive - best_secular.frequency + window);
  const SpectralPeak upper = dominant_peak(best_spectrum, f_drive + best_secular.frequency - window,
                                           f_drive + best_secular.frequency + window);
  const double sidebands = (lower.found ? lower.amplitude : 0.0) +
                           (upper.found ? upper.amplitude : 0.0);
  if (!lower.found && !upper.found)
    throw physics_error("micromotion sidebands not resolvable in the trajectory spectrum");
  return sidebands / best_secular.amplitude;
}

}  // namespace iontrap
