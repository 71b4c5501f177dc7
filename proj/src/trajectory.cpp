#include "iontrap/pseudo.hpp"

#include <cmath>
#include <optional>

#include "iontrap/constants.hpp"
#include "iontrap/errors.hpp"
#include "iontrap/interp.hpp"

namespace iontrap {
namespace {

bool inside_interior(const Grid& g, const Vec2& p) {
  return p.x() > g.x(1) && p.x() < g.x(g.nx - 2) && p.y() > g.y(1) && p.y() < g.y(g.ny - 2);
}

}  // namespace

Trajectory simulate_trajectory(const Array2d& phi_rf, const Array2d& phi_static,
                               const Grid& grid, const ElectrodeMask& mask,
                               const Species& species, const DriveConfig& drive,
                               const Vec2& r0, const Vec2& v0, double duration,
                               int steps_per_period) {
  if (!(species.mass > 0.0)) throw input_error("species mass must be positive");
  if (species.charge == 0.0) throw input_error("species charge must be nonzero");
  if (!(drive.omega > 0.0)) throw input_error("drive frequency must be positive");
  if (steps_per_period < 50)
    throw input_error("trajectory needs at least 50 steps per RF period");
  if (!(duration > 0.0)) throw input_error("trajectory duration must be positive");
  if (!inside_interior(grid, r0)) throw input_error("initial position is outside the grid interior");

  const bool has_rf = phi_rf.size() > 0;
  const bool has_static = phi_static.size() > 0;
  if (has_rf && (phi_rf.rows() != grid.nx || phi_rf.cols() != grid.ny))
    throw input_error("RF potential array does not match the grid");
  if (has_static && (phi_static.rows() != grid.nx || phi_static.cols() != grid.ny))
    throw input_error("static potential array does not match the grid");

  std::optional<Bicubic<double>> rf, st;
  if (has_rf) rf.emplace(grid, phi_rf);
  if (has_static) st.emplace(grid, phi_static);

  const double dt = 2.0 * kPi / (drive.omega * static_cast<double>(steps_per_period));
  const double qm = species.charge / species.mass;
  const auto accel = [&](const Vec2& r, double t) -> Vec2 {
    Vec2 a = Vec2::Zero();
    if (rf) a -= rf->gradient(r) * std::cos(drive.omega * t);
    if (st) a -= st->gradient(r);
    return qm * a;
  };

  Trajectory traj;
  traj.species = species;
  traj.drive = drive;
  traj.initial_position = r0;
  traj.initial_velocity = v0;
  traj.dt = dt;

  const long steps = static_cast<long>(std::ceil(duration / dt));
  traj.t.reserve(steps + 1);
  traj.x.reserve(steps + 1);
  traj.y.reserve(steps + 1);
  traj.vx.reserve(steps + 1);
  traj.vy.reserve(steps + 1);

  Vec2 r = r0, v = v0;
  Vec2 a = accel(r, 0.0);
  for (long n = 0; n <= steps; ++n) {
    const double t = n * dt;
    traj.t.push_back(t);
    traj.x.push_back(r.x());
    traj.y.push_back(r.y());
    traj.vx.push_back(v.x());
    traj.vy.push_back(v.y());
    if (n == steps) break;

    const Vec2 v_half = v + 0.5 * dt * a;
    r += dt * v_half;
    if (!inside_interior(grid, r) ||
        mask.owner(grid.nearest_i(r.x()), grid.nearest_j(r.y())) >= 0) {
      traj.escaped = true;
      traj.escape_time = t + dt;
      break;
    }
    a = accel(r, t + dt);
    v = v_half + 0.5 * dt * a;
  }
  return traj;
}

}  // namespace iontrap
