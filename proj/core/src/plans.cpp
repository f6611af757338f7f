#include "planloc/plans.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>

#include "planloc/errors.hpp"

namespace planloc {
namespace {

struct Edge {
  bool vertical = false;
  long long key = 0;  // coordinate in micrometres
  double coord = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t room = 0;
  Side side = Side::PosX;
};

struct Run {
  double lo = 0.0;
  double hi = 0.0;
  std::string wall_id;
};

long long micro(double v) { return std::llround(v * 1e6); }

RectRoom rect(const std::string& id, double x0, double y0, double x1, double y1) {
  return {id, x0, y0, x1, y1};
}

RectDoor door(const std::string& id, double x, double y, const std::string& a,
              const std::string& b) {
  return {id, {x, y}, a, b, 0.9};
}

FloorPlan make_fixture(const std::string& name) {
  if (name == "single_room") {
    return build_rect_plan({rect("A", 1, 1, 6, 5)}, {});
  }
  if (name == "two_room") {
    return build_rect_plan({rect("A", 1, 1, 6, 5), rect("B", 6, 1.5, 10, 4.5)},
                           {door("D1", 6, 3, "A", "B")});
  }
  if (name == "asym5") {
    return build_rect_plan(
        {rect("R1", 1, 1, 6, 5), rect("R2", 6, 1, 9, 5), rect("R3", 9, 1, 13.5, 5),
         rect("R4", 1, 5, 6, 11), rect("R5", 9, 5, 13.5, 11)},
        {door("D1", 6, 3, "R1", "R2"), door("D2", 9, 3, "R2", "R3"),
         door("D3", 3.5, 5, "R1", "R4"), door("D4", 11, 5, "R3", "R5")});
  }
  std::vector<RectRoom> grid = {rect("R00", 1, 1, 6, 6), rect("R10", 6, 1, 11, 6),
                                rect("R01", 1, 6, 6, 11), rect("R11", 6, 6, 11, 11)};
  std::vector<RectDoor> grid_doors = {
      door("D1", 6, 3.5, "R00", "R10"), door("D2", 3.5, 6, "R00", "R01"),
      door("D3", 8.5, 6, "R10", "R11"), door("D4", 6, 8.5, "R01", "R11")};
  if (name == "sym2x2") return build_rect_plan(grid, grid_doors);
  if (name == "sym2x2_annex") {
    grid.push_back(rect("ANNEX", 1, -3, 6, 1));
    grid_doors.push_back(door("D5", 3.5, 1, "ANNEX", "R00"));
    return build_rect_plan(grid, grid_doors);
  }
  if (name == "corridor") {
    return build_rect_plan(
        {rect("C", 1, 5, 15, 7.5), rect("B1", 1, 1, 5.5, 5), rect("B2", 5.5, 1, 9, 5),
         rect("B3", 9, 1, 15, 5), rect("U1", 1, 7.5, 7, 12), rect("U2", 7, 7.5, 15, 11)},
        {door("D1", 3.25, 5, "C", "B1"), door("D2", 7.25, 5, "C", "B2"),
         door("D3", 12, 5, "C", "B3"), door("D4", 4, 7.5, "C", "U1"),
         door("D5", 11, 7.5, "C", "U2")});
  }
  throw InvalidInput("unknown fixture plan '" + name + "'");
}

// k values from {lo, ..., hi} with pairwise separation >= sep, uniformly over such sets,
// returned in random order.
std::vector<int> separated_values(int k, int lo, int hi, int sep, std::mt19937_64& rng) {
  const int span = (hi - lo + 1) - (k - 1) * (sep - 1);
  if (span < k) return {};
  std::vector<int> pool(span);
  for (int i = 0; i < span; ++i) pool[i] = i;
  std::shuffle(pool.begin(), pool.end(), rng);
  std::vector<int> chosen(pool.begin(), pool.begin() + k);
  std::sort(chosen.begin(), chosen.end());
  for (int i = 0; i < k; ++i) chosen[i] = lo + chosen[i] + i * (sep - 1);
  std::shuffle(chosen.begin(), chosen.end(), rng);
  return chosen;
}

Eigen::Vector2d room_center(const FloorPlan& plan, const std::string& id) {
  return room_box(plan, plan.room(id)).center();
}

// Point `offset` metres from the doorway into `room`, measured from the wall centerline.
Eigen::Vector2d approach_point(const FloorPlan& plan, const PlanDoorway& d, const std::string& room,
                               double offset) {
  const auto wall_id = doorway_wall(plan, d);
  if (!wall_id) throw ValidationError("doorway '" + d.id + "' has no shared wall");
  const PlanWall& w = plan.wall(*wall_id);
  const Eigen::Vector2d dir = (w.end - w.start).normalized();
  const Eigen::Vector2d n(-dir.y(), dir.x());
  const Eigen::Vector2d foot = w.start + (d.position - w.start).dot(dir) * dir;
  const double side = (room_center(plan, room) - foot).dot(n) >= 0.0 ? 1.0 : -1.0;
  return foot + side * offset * n;
}

struct TourResult {
  std::vector<Eigen::Vector2d> waypoints;
  std::vector<std::string> rooms;
};

TourResult tour(const FloorPlan& plan, const std::string& start_room, int max_rooms) {
  plan.room(start_room);
  const std::size_t limit =
      max_rooms <= 0 ? plan.rooms.size() : static_cast<std::size_t>(max_rooms);
  constexpr double kApproach = 0.6;

  TourResult out;
  std::set<std::string> visited;
  std::size_t keep = 0;

  std::function<void(const std::string&)> visit = [&](const std::string& room) {
    visited.insert(room);
    out.rooms.push_back(room);
    for (const auto& d : plan.doorways) {
      if (visited.size() >= limit) return;
      std::string next;
      if (d.rooms[0] == room) next = d.rooms[1];
      else if (d.rooms[1] == room) next = d.rooms[0];
      else continue;
      if (visited.contains(next)) continue;
      out.waypoints.push_back(approach_point(plan, d, room, kApproach));
      out.waypoints.push_back(approach_point(plan, d, next, kApproach));
      out.waypoints.push_back(room_center(plan, next));
      keep = out.waypoints.size();
      visit(next);
      out.waypoints.push_back(approach_point(plan, d, next, kApproach));
      out.waypoints.push_back(approach_point(plan, d, room, kApproach));
      out.waypoints.push_back(room_center(plan, room));
    }
  };

  out.waypoints.push_back(room_center(plan, start_room));
  keep = 1;
  visit(start_room);
  out.waypoints.resize(keep);
  return out;
}

}  // namespace

FloorPlan build_rect_plan(const std::vector<RectRoom>& rooms, const std::vector<RectDoor>& doors,
                          double thickness) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    const auto& r = rooms[i];
    if (!(r.x1 > r.x0) || !(r.y1 > r.y0)) {
      throw InvalidInput("room '" + r.id + "' has non-positive extent");
    }
    edges.push_back({true, micro(r.x1), r.x1, r.y0, r.y1, i, Side::PosX});
    edges.push_back({true, micro(r.x0), r.x0, r.y0, r.y1, i, Side::NegX});
    edges.push_back({false, micro(r.y1), r.y1, r.x0, r.x1, i, Side::PosY});
    edges.push_back({false, micro(r.y0), r.y0, r.x0, r.x1, i, Side::NegY});
  }

  // Group edges per line (vertical lines first), then merge touching intervals into runs.
  std::map<std::pair<int, long long>, std::vector<std::size_t>> lines;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    lines[{edges[e].vertical ? 0 : 1, edges[e].key}].push_back(e);
  }

  FloorPlan plan;
  std::vector<std::array<std::string, 4>> refs(rooms.size());
  int next_id = 1;
  for (auto& [line, members] : lines) {
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return edges[a].lo < edges[b].lo || (edges[a].lo == edges[b].lo && edges[a].hi < edges[b].hi);
    });
    std::vector<Run> runs;
    std::vector<std::size_t> run_of(members.size());
    for (std::size_t m = 0; m < members.size(); ++m) {
      const Edge& e = edges[members[m]];
      if (runs.empty() || e.lo > runs.back().hi + 1e-9) {
        runs.push_back({e.lo, e.hi, "W" + std::to_string(next_id++)});
      } else {
        runs.back().hi = std::max(runs.back().hi, e.hi);
      }
      run_of[m] = runs.size() - 1;
    }
    const Edge& first = edges[members.front()];
    for (const auto& run : runs) {
      PlanWall w;
      w.id = run.wall_id;
      w.thickness = thickness;
      if (first.vertical) {
        w.start = {first.coord, run.lo};
        w.end = {first.coord, run.hi};
      } else {
        w.start = {run.lo, first.coord};
        w.end = {run.hi, first.coord};
      }
      plan.walls.push_back(w);
    }
    for (std::size_t m = 0; m < members.size(); ++m) {
      const Edge& e = edges[members[m]];
      refs[e.room][static_cast<int>(e.side)] = runs[run_of[m]].wall_id;
    }
  }
  // Keep wall ids in plan order.
  std::sort(plan.walls.begin(), plan.walls.end(), [](const PlanWall& a, const PlanWall& b) {
    return std::stoi(a.id.substr(1)) < std::stoi(b.id.substr(1));
  });

  for (std::size_t i = 0; i < rooms.size(); ++i) plan.rooms.push_back({rooms[i].id, refs[i]});
  for (const auto& d : doors) {
    plan.doorways.push_back({d.id, d.position, {d.room_a, d.room_b}, d.width});
  }
  validate_plan(plan);
  return plan;
}

const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names = {"single_room", "two_room",     "asym5",
                                                 "sym2x2",      "sym2x2_annex", "corridor"};
  return names;
}

FloorPlan fixture_plan(const std::string& name) { return make_fixture(name); }

FloorPlan generate_random_plan(int n_rooms, std::uint64_t seed, const GeneratorOptions& options) {
  if (n_rooms < 2 || n_rooms > 20) {
    throw InvalidInput("generate_random_plan: n_rooms must lie in [2, 20]");
  }
  const int lo = static_cast<int>(std::lround(options.min_size * 10));
  const int hi = static_cast<int>(std::lround(options.max_size * 10));
  const int sep = std::max(1, static_cast<int>(std::lround(options.min_separation * 10)));
  if (lo <= 0 || hi < lo) throw InvalidInput("generate_random_plan: bad size range");

  std::mt19937_64 rng(seed);
  static constexpr int kDx[4] = {1, -1, 0, 0};
  static constexpr int kDy[4] = {0, 0, 1, -1};

  for (int attempt = 0; attempt < options.max_retries; ++attempt) {
    std::vector<std::pair<int, int>> cells = {{0, 0}};
    std::set<std::pair<int, int>> occupied = {{0, 0}};
    std::vector<std::pair<std::size_t, std::size_t>> links;  // (parent, child) cell indices
    while (static_cast<int>(cells.size()) < n_rooms) {
      const std::size_t parent = std::uniform_int_distribution<std::size_t>(0, cells.size() - 1)(rng);
      const int dir = std::uniform_int_distribution<int>(0, 3)(rng);
      const std::pair<int, int> next = {cells[parent].first + kDx[dir],
                                        cells[parent].second + kDy[dir]};
      if (occupied.contains(next)) continue;
      occupied.insert(next);
      cells.push_back(next);
      links.emplace_back(parent, cells.size() - 1);
    }
    int min_c = 0, max_c = 0, min_r = 0, max_r = 0;
    for (const auto& [c, r] : cells) {
      min_c = std::min(min_c, c);
      max_c = std::max(max_c, c);
      min_r = std::min(min_r, r);
      max_r = std::max(max_r, r);
    }
    const int ncols = max_c - min_c + 1;
    const int nrows = max_r - min_r + 1;

    std::vector<int> sizes;
    if (options.distinct_dimensions) {
      sizes = separated_values(ncols + nrows, lo, hi, sep, rng);
      if (sizes.empty()) continue;
    } else {
      for (int i = 0; i < ncols + nrows; ++i) {
        sizes.push_back(std::uniform_int_distribution<int>(lo, hi)(rng));
      }
    }
    // Decimetre grid lines; the plan starts at (1, 1) so no surface passes through the origin.
    std::vector<int> xs = {10};
    std::vector<int> ys = {10};
    for (int c = 0; c < ncols; ++c) xs.push_back(xs.back() + sizes[c]);
    for (int r = 0; r < nrows; ++r) ys.push_back(ys.back() + sizes[ncols + r]);

    std::vector<RectRoom> rooms;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const int c = cells[i].first - min_c;
      const int r = cells[i].second - min_r;
      rooms.push_back(rect("R" + std::to_string(i + 1), xs[c] / 10.0, ys[r] / 10.0,
                           xs[c + 1] / 10.0, ys[r + 1] / 10.0));
    }
    std::vector<RectDoor> doors;
    for (std::size_t k = 0; k < links.size(); ++k) {
      const auto [p, q] = links[k];
      const int pc = cells[p].first - min_c;
      const int pr = cells[p].second - min_r;
      const int qc = cells[q].first - min_c;
      const int qr = cells[q].second - min_r;
      int x = 0;
      int y = 0;
      constexpr int kMargin = 8;
      if (pr == qr) {
        x = xs[std::max(pc, qc)];
        y = std::uniform_int_distribution<int>(ys[pr] + kMargin, ys[pr + 1] - kMargin)(rng);
      } else {
        y = ys[std::max(pr, qr)];
        x = std::uniform_int_distribution<int>(xs[pc] + kMargin, xs[pc + 1] - kMargin)(rng);
      }
      doors.push_back(door("D" + std::to_string(k + 1), x / 10.0, y / 10.0, rooms[p].id,
                           rooms[q].id));
    }
    return build_rect_plan(rooms, doors, options.thickness);
  }
  throw GenerationError("generate_random_plan: no valid packing for " + std::to_string(n_rooms) +
                        " rooms after " + std::to_string(options.max_retries) + " attempts");
}

std::vector<Eigen::Vector2d> tour_waypoints(const FloorPlan& plan, const std::string& start_room,
                                            int max_rooms) {
  return tour(plan, start_room, max_rooms).waypoints;
}

std::vector<std::string> tour_rooms(const FloorPlan& plan, const std::string& start_room,
                                    int max_rooms) {
  return tour(plan, start_room, max_rooms).rooms;
}

}  // namespace planloc
