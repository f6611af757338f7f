#include "planloc/floor_plan.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "planloc/errors.hpp"
#include "planloc/graph_io.hpp"

namespace planloc {
namespace {

constexpr double kEps = 1e-6;

const nlohmann::json& field(const nlohmann::json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + "." + key + ": missing field");
  return *it;
}

std::string string_field(const nlohmann::json& obj, const char* key, const std::string& path) {
  const auto& j = field(obj, key, path);
  if (!j.is_string()) throw ParseError(path + "." + key + ": expected a string");
  return j.get<std::string>();
}

Eigen::Vector2d point_field(const nlohmann::json& obj, const char* key, const std::string& path) {
  const Eigen::VectorXd v = vector_from_json(field(obj, key, path), path + "." + key);
  if (v.size() != 2) throw ParseError(path + "." + key + ": expected [x, y]");
  return v;
}

double number_field(const nlohmann::json& obj, const char* key, const std::string& path) {
  const auto& j = field(obj, key, path);
  if (!j.is_number()) throw ParseError(path + "." + key + ": expected a number");
  return j.get<double>();
}

Eigen::Vector2d side_inward(Side side) {
  switch (side) {
    case Side::PosX:
      return {-1.0, 0.0};
    case Side::NegX:
      return {1.0, 0.0};
    case Side::PosY:
      return {0.0, -1.0};
    case Side::NegY:
      return {0.0, 1.0};
  }
  return {0.0, 0.0};
}

bool is_vertical(const PlanWall& w) { return std::abs(w.start.x() - w.end.x()) <= 1e-9; }
bool is_horizontal(const PlanWall& w) { return std::abs(w.start.y() - w.end.y()) <= 1e-9; }

double point_segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                              const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (a + t * ab - p).norm();
}

}  // namespace

std::string_view to_string(Side side) {
  switch (side) {
    case Side::PosX:
      return "+x";
    case Side::NegX:
      return "-x";
    case Side::PosY:
      return "+y";
    case Side::NegY:
      return "-y";
  }
  return "?";
}

Side side_from_string(std::string_view text) {
  for (Side s : kSides) {
    if (to_string(s) == text) return s;
  }
  throw ParseError("unknown room side '" + std::string(text) + "'");
}

Axis axis_of(Side side) { return side == Side::PosX || side == Side::NegX ? Axis::X : Axis::Y; }

const PlanWall& FloorPlan::wall(const std::string& id) const {
  const auto idx = wall_index(id);
  if (!idx) throw ValidationError("unknown wall id '" + id + "'");
  return walls[*idx];
}

const PlanRoom& FloorPlan::room(const std::string& id) const {
  const auto idx = room_index(id);
  if (!idx) throw ValidationError("unknown room id '" + id + "'");
  return rooms[*idx];
}

std::optional<std::size_t> FloorPlan::wall_index(const std::string& id) const {
  for (std::size_t i = 0; i < walls.size(); ++i) {
    if (walls[i].id == id) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> FloorPlan::room_index(const std::string& id) const {
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    if (rooms[i].id == id) return i;
  }
  return std::nullopt;
}

WallSurfaces wall_surfaces(const PlanWall& wall) {
  const Eigen::Vector2d dir = (wall.end - wall.start).normalized();
  const Eigen::Vector2d n(-dir.y(), dir.x());
  const double c = n.dot(wall.start);
  const double h = 0.5 * wall.thickness;

  WallSurfaces out;
  out.wall_id = wall.id;
  out.first.plane = normalize_away_from_origin(n, c + h, Frame::Plan);
  out.first.facing = n;
  out.first.a = wall.start + h * n;
  out.first.b = wall.end + h * n;
  out.second.plane = normalize_away_from_origin(-n, -(c - h), Frame::Plan);
  out.second.facing = -n;
  out.second.a = wall.start - h * n;
  out.second.b = wall.end - h * n;
  out.axis = classify_axis(out.first.plane);
  return out;
}

std::vector<WallSurfaces> extract_wall_surfaces(const FloorPlan& plan) {
  std::vector<WallSurfaces> out;
  out.reserve(plan.walls.size());
  for (const auto& wall : plan.walls) out.push_back(wall_surfaces(wall));
  return out;
}

WallSurface room_surface(const FloorPlan& plan, const PlanRoom& room, Side side) {
  const WallSurfaces faces = wall_surfaces(plan.wall(room.wall(side)));
  return faces.first.facing.dot(side_inward(side)) > 0.0 ? faces.first : faces.second;
}

Box room_box(const FloorPlan& plan, const PlanRoom& room) {
  Box box;
  box.xmax = room_surface(plan, room, Side::PosX).a.x();
  box.xmin = room_surface(plan, room, Side::NegX).a.x();
  box.ymax = room_surface(plan, room, Side::PosY).a.y();
  box.ymin = room_surface(plan, room, Side::NegY).a.y();
  return box;
}

std::optional<std::string> doorway_wall(const FloorPlan& plan, const PlanDoorway& doorway) {
  const auto ia = plan.room_index(doorway.rooms[0]);
  const auto ib = plan.room_index(doorway.rooms[1]);
  if (!ia || !ib) return std::nullopt;
  const auto& ra = plan.rooms[*ia];
  const auto& rb = plan.rooms[*ib];
  std::optional<std::string> best;
  double best_dist = 0.0;
  for (const auto& wa : ra.walls) {
    if (std::find(rb.walls.begin(), rb.walls.end(), wa) == rb.walls.end()) continue;
    const auto& w = plan.wall(wa);
    const double dist = point_segment_distance(doorway.position, w.start, w.end);
    if (!best || dist < best_dist) {
      best = wa;
      best_dist = dist;
    }
  }
  return best;
}

void validate_plan(const FloorPlan& plan) {
  std::set<std::string> ids;
  for (const auto& w : plan.walls) {
    if (w.id.empty()) throw ValidationError("wall with empty id");
    if (!ids.insert(w.id).second) throw ValidationError("duplicate wall id '" + w.id + "'");
    if (!w.start.allFinite() || !w.end.allFinite() || !std::isfinite(w.thickness)) {
      throw ValidationError("wall '" + w.id + "' has non-finite coordinates");
    }
    if ((w.end - w.start).norm() <= 1e-9) {
      throw ValidationError("wall '" + w.id + "' has zero length");
    }
    if (!(w.thickness > 0.0)) {
      throw ValidationError("wall '" + w.id + "' must have positive thickness");
    }
  }

  ids.clear();
  for (const auto& r : plan.rooms) {
    if (r.id.empty()) throw ValidationError("room with empty id");
    if (!ids.insert(r.id).second) throw ValidationError("duplicate room id '" + r.id + "'");
    for (Side side : kSides) {
      const auto& wid = r.wall(side);
      if (!plan.wall_index(wid)) {
        throw ValidationError("room '" + r.id + "' side " + std::string(to_string(side)) +
                              " references missing wall '" + wid + "'");
      }
      const auto& w = plan.wall(wid);
      const bool ok = axis_of(side) == Axis::X ? is_vertical(w) : is_horizontal(w);
      if (!ok) {
        throw ValidationError("room '" + r.id + "': wall '" + wid + "' on side " +
                              std::string(to_string(side)) + " has the wrong orientation");
      }
    }
    const Box box = room_box(plan, r);
    if (!(box.xmax - box.xmin > kEps) || !(box.ymax - box.ymin > kEps)) {
      throw ValidationError("room '" + r.id + "': its walls do not enclose a positive area");
    }
    for (Side side : kSides) {
      const auto& w = plan.wall(r.wall(side));
      const bool along_y = axis_of(side) == Axis::X;
      const double lo = along_y ? std::min(w.start.y(), w.end.y()) : std::min(w.start.x(), w.end.x());
      const double hi = along_y ? std::max(w.start.y(), w.end.y()) : std::max(w.start.x(), w.end.x());
      const double need_lo = along_y ? box.ymin : box.xmin;
      const double need_hi = along_y ? box.ymax : box.xmax;
      if (lo > need_lo + kEps || hi < need_hi - kEps) {
        throw ValidationError("room '" + r.id + "': wall '" + w.id + "' on side " +
                              std::string(to_string(side)) + " does not span the room");
      }
    }
  }

  ids.clear();
  for (const auto& d : plan.doorways) {
    if (d.id.empty()) throw ValidationError("doorway with empty id");
    if (!ids.insert(d.id).second) throw ValidationError("duplicate doorway id '" + d.id + "'");
    for (const auto& rid : d.rooms) {
      if (!plan.room_index(rid)) {
        throw ValidationError("doorway '" + d.id + "' references missing room '" + rid + "'");
      }
    }
    if (d.rooms[0] == d.rooms[1]) {
      throw ValidationError("doorway '" + d.id + "' must connect two distinct rooms");
    }
    if (!d.position.allFinite() || !(d.width > 0.0)) {
      throw ValidationError("doorway '" + d.id + "' needs a finite position and positive width");
    }
    const auto wid = doorway_wall(plan, d);
    if (!wid) {
      throw ValidationError("doorway '" + d.id + "': rooms '" + d.rooms[0] + "' and '" +
                            d.rooms[1] + "' share no wall");
    }
    const auto& w = plan.wall(*wid);
    if (point_segment_distance(d.position, w.start, w.end) > 0.5) {
      throw ValidationError("doorway '" + d.id + "' lies more than 0.5 m from shared wall '" +
                            *wid + "'");
    }
  }
}

FloorPlan plan_from_json(const nlohmann::json& doc) {
  FloorPlan plan;
  const auto& walls = field(doc, "walls", "$");
  if (!walls.is_array()) throw ParseError("$.walls: expected an array");
  for (std::size_t i = 0; i < walls.size(); ++i) {
    const std::string path = "$.walls[" + std::to_string(i) + "]";
    PlanWall w;
    w.id = string_field(walls[i], "id", path);
    w.start = point_field(walls[i], "start", path);
    w.end = point_field(walls[i], "end", path);
    w.thickness = number_field(walls[i], "thickness", path);
    plan.walls.push_back(std::move(w));
  }

  const auto& rooms = field(doc, "rooms", "$");
  if (!rooms.is_array()) throw ParseError("$.rooms: expected an array");
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    const std::string path = "$.rooms[" + std::to_string(i) + "]";
    PlanRoom r;
    r.id = string_field(rooms[i], "id", path);
    const auto& refs = field(rooms[i], "walls", path);
    for (Side side : kSides) {
      const std::string key(to_string(side));
      r.walls[static_cast<int>(side)] = string_field(refs, key.c_str(), path + ".walls");
    }
    if (refs.size() != 4) throw ParseError(path + ".walls: expected exactly +x, -x, +y, -y");
    plan.rooms.push_back(std::move(r));
  }

  if (doc.contains("doorways")) {
    const auto& doors = doc["doorways"];
    if (!doors.is_array()) throw ParseError("$.doorways: expected an array");
    for (std::size_t i = 0; i < doors.size(); ++i) {
      const std::string path = "$.doorways[" + std::to_string(i) + "]";
      PlanDoorway d;
      d.id = string_field(doors[i], "id", path);
      d.position = point_field(doors[i], "position", path);
      const auto& rr = field(doors[i], "rooms", path);
      if (!rr.is_array() || rr.size() != 2 || !rr[0].is_string() || !rr[1].is_string()) {
        throw ParseError(path + ".rooms: expected two room ids");
      }
      d.rooms = {rr[0].get<std::string>(), rr[1].get<std::string>()};
      if (doors[i].contains("width")) d.width = number_field(doors[i], "width", path);
      plan.doorways.push_back(std::move(d));
    }
  }
  validate_plan(plan);
  return plan;
}

nlohmann::json plan_to_json(const FloorPlan& plan) {
  nlohmann::json walls = nlohmann::json::array();
  for (const auto& w : plan.walls) {
    walls.push_back({{"id", w.id},
                     {"start", {w.start.x(), w.start.y()}},
                     {"end", {w.end.x(), w.end.y()}},
                     {"thickness", w.thickness}});
  }
  nlohmann::json rooms = nlohmann::json::array();
  for (const auto& r : plan.rooms) {
    nlohmann::json refs = nlohmann::json::object();
    for (Side side : kSides) refs[std::string(to_string(side))] = r.wall(side);
    rooms.push_back({{"id", r.id}, {"walls", std::move(refs)}});
  }
  nlohmann::json doors = nlohmann::json::array();
  for (const auto& d : plan.doorways) {
    doors.push_back({{"id", d.id},
                     {"position", {d.position.x(), d.position.y()}},
                     {"rooms", {d.rooms[0], d.rooms[1]}},
                     {"width", d.width}});
  }
  return {{"walls", std::move(walls)}, {"rooms", std::move(rooms)}, {"doorways", std::move(doors)}};
}

FloorPlan load_plan(const std::filesystem::path& path) {
  const nlohmann::json doc = read_json_file(path);
  try {
    return plan_from_json(doc);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void save_plan(const std::filesystem::path& path, const FloorPlan& plan) {
  write_json_file(path, plan_to_json(plan));
}

}  // namespace planloc
