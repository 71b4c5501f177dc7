#include "iontrap/contours.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "iontrap/errors.hpp"
#include "iontrap/units.hpp"

namespace iontrap {

std::vector<double> geometric_levels(double lo, double cap, int n) {
  if (!(cap > 0.0) || !std::isfinite(cap)) throw input_error("contour cap must be positive");
  if (n < 1) throw input_error("contour level count must be at least 1");
  if (!(lo < cap)) throw input_error("contour floor must lie below the cap");
  double floor = lo;
  if (!(floor > 0.0)) floor = 1e-4 * cap;
  std::vector<double> levels;
  levels.reserve(static_cast<std::size_t>(n));
  if (n == 1) {
    levels.push_back(cap);
    return levels;
  }
  const double ratio = std::pow(cap / floor, 1.0 / (n - 1));
  double v = floor;
  for (int k = 0; k < n; ++k, v *= ratio) levels.push_back(v);
  levels.back() = cap;  // guard against accumulated rounding
  return levels;
}

namespace {

// Edge identifiers: 2 * (node index) for the horizontal edge leaving node
// (i, j) toward (i+1, j), 2 * (node index) + 1 for the vertical edge toward
// (i, j+1).
inline std::int64_t edge_key(int i, int j, int nx, bool vertical) {
  return 2 * (static_cast<std::int64_t>(j) * nx + i) + (vertical ? 1 : 0);
}

struct LevelTrace {
  std::unordered_map<std::int64_t, Vec2> site;               // edge -> crossing point
  std::unordered_map<std::int64_t, std::vector<std::int64_t>> adj;  // edge -> linked edges

  void add_segment(std::int64_t a, std::int64_t b) {
    if (a == b) return;
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
};

inline Vec2 cross_point(const Grid& grid, int i, int j, bool vertical, double fa, double fb,
                        double level) {
  const double den = fb - fa;
  const double t = (den == 0.0) ? 0.5 : std::clamp((level - fa) / den, 0.0, 1.0);
  const Vec2 p = grid.point(i, j);
  return vertical ? Vec2(p.x(), p.y() + t * grid.h) : Vec2(p.x() + t * grid.h, p.y());
}

void chain_level(LevelTrace& tr, double level, std::vector<ContourPolyline>& out) {
  // Consume the adjacency map: open chains from degree-1 edges first, then
  // whatever remains forms closed loops.
  const auto take_next = [&](std::int64_t from, std::int64_t prev, bool& ok) -> std::int64_t {
    auto it = tr.adj.find(from);
    ok = false;
    if (it == tr.adj.end()) return 0;
    while (!it->second.empty()) {
      const std::int64_t next = it->second.front();
      it->second.front() = it->second.back();
      it->second.pop_back();
      if (next == prev) continue;  // stale back-link
      ok = true;
      return next;
    }
    return 0;
  };

  const auto walk = [&](std::int64_t start) {
    ContourPolyline line;
    line.level = level;
    line.points.push_back(tr.site.at(start));
    std::int64_t prev = -1, cur = start;
    while (true) {
      bool ok = false;
      const std::int64_t next = take_next(cur, prev, ok);
      if (!ok) break;
      // Remove the reciprocal link so the segment is consumed once.
      auto back = tr.adj.find(next);
      if (back != tr.adj.end()) {
        auto pos = std::find(back->second.begin(), back->second.end(), cur);
        if (pos != back->second.end()) {
          *pos = back->second.back();
          back->second.pop_back();
        }
      }
      if (next == start) {
        line.closed = true;
        break;
      }
      line.points.push_back(tr.site.at(next));
      prev = cur;
      cur = next;
    }
    if (line.points.size() >= 2 || line.closed) out.push_back(std::move(line));
  };

  std::vector<std::int64_t> opens;
  for (const auto& [key, links] : tr.adj)
    if (links.size() == 1) opens.push_back(key);
  std::sort(opens.begin(), opens.end());  // deterministic output order
  for (const std::int64_t key : opens) {
    auto it = tr.adj.find(key);
    if (it == tr.adj.end() || it->second.empty()) continue;
    walk(key);
  }
  std::vector<std::int64_t> loops;
  for (const auto& [key, links] : tr.adj)
    if (!links.empty()) loops.push_back(key);
  std::sort(loops.begin(), loops.end());
  for (const std::int64_t key : loops) {
    auto it = tr.adj.find(key);
    if (it == tr.adj.end() || it->second.empty()) continue;
    walk(key);
  }
}

}  // namespace

std::vector<ContourPolyline> extract_contours(const Array2d& field, const Grid& grid,
                                              const std::vector<double>& levels,
                                              const ElectrodeMask* mask) {
  if (field.rows() != grid.nx || field.cols() != grid.ny)
    throw input_error("contour field does not match the grid");
  std::vector<ContourPolyline> out;

  for (const double level : levels) {
    if (!std::isfinite(level)) throw input_error("contour level must be finite");
    LevelTrace tr;
    for (int j = 0; j + 1 < grid.ny; ++j) {
      for (int i = 0; i + 1 < grid.nx; ++i) {
        if (mask && (!mask->is_free(i, j) || !mask->is_free(i + 1, j) ||
                     !mask->is_free(i + 1, j + 1) || !mask->is_free(i, j + 1)))
          continue;
        const double f00 = field(i, j), f10 = field(i + 1, j);
        const double f11 = field(i + 1, j + 1), f01 = field(i, j + 1);
        int code = 0;
        if (f00 >= level) code |= 1;
        if (f10 >= level) code |= 2;
        if (f11 >= level) code |= 4;
        if (f01 >= level) code |= 8;
        if (code == 0 || code == 15) continue;

        const std::int64_t bottom = edge_key(i, j, grid.nx, false);
        const std::int64_t right = edge_key(i + 1, j, grid.nx, true);
        const std::int64_t top = edge_key(i, j + 1, grid.nx, false);
        const std::int64_t left = edge_key(i, j, grid.nx, true);
        const auto site = [&](std::int64_t key) -> Vec2 {
          if (key == bottom) return cross_point(grid, i, j, false, f00, f10, level);
          if (key == right) return cross_point(grid, i + 1, j, true, f10, f11, level);
          if (key == top) return cross_point(grid, i, j + 1, false, f01, f11, level);
          return cross_point(grid, i, j, true, f00, f01, level);
        };
        const auto emit = [&](std::int64_t a, std::int64_t b) {
          if (!tr.site.count(a)) tr.site.emplace(a, site(a));
          if (!tr.site.count(b)) tr.site.emplace(b, site(b));
          tr.add_segment(a, b);
        };

        switch (code) {
          case 1: case 14: emit(left, bottom); break;
          case 2: case 13: emit(bottom, right); break;
          case 3: case 12: emit(left, right); break;
          case 4: case 11: emit(right, top); break;
          case 6: case 9: emit(bottom, top); break;
          case 7: case 8: emit(left, top); break;
          case 5: case 10: {
            // Saddle cell: pair the crossings so the curve separates the
            // corners matching the sign of the cell-center average.
            const double center = 0.25 * (f00 + f10 + f11 + f01);
            const bool center_above = center >= level;
            const bool diag_above = (code == 5);  // corners 0 and 2 above
            if (diag_above == center_above) {
              emit(left, top);
              emit(bottom, right);
            } else {
              emit(left, bottom);
              emit(right, top);
            }
            break;
          }
          default: break;
        }
      }
    }
    chain_level(tr, level, out);
  }
  return out;
}

std::string contours_csv(const std::vector<ContourPolyline>& lines) {
  std::string out = "x,y,value\n";
  bool first = true;
  for (const ContourPolyline& line : lines) {
    if (!first) out += "\n";
    first = false;
    const auto row = [&](const Vec2& p) {
      out += format_shortest(p.x());
      out += ",";
      out += format_shortest(p.y());
      out += ",";
      out += format_shortest(line.level);
      out += "\n";
    };
    for (const Vec2& p : line.points) row(p);
    if (line.closed && !line.points.empty()) row(line.points.front());
  }
  return out;
}

}  // namespace iontrap
