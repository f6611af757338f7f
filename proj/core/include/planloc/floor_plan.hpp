#pragma once

#include <array>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "planloc/geometry.hpp"

namespace planloc {

struct PlanWall {
  std::string id;
  Eigen::Vector2d start = Eigen::Vector2d::Zero();
  Eigen::Vector2d end = Eigen::Vector2d::Zero();
  double thickness = 0.2;
};

/// Side of a room. The wall on the +x side bounds the room from above in x, and so on.
enum class Side { PosX = 0, NegX = 1, PosY = 2, NegY = 3 };
inline constexpr std::array<Side, 4> kSides = {Side::PosX, Side::NegX, Side::PosY, Side::NegY};
std::string_view to_string(Side side);
Side side_from_string(std::string_view text);
Axis axis_of(Side side);

struct PlanRoom {
  std::string id;
  std::array<std::string, 4> walls;  // indexed by Side

  const std::string& wall(Side side) const { return walls[static_cast<int>(side)]; }
};

struct PlanDoorway {
  std::string id;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  std::array<std::string, 2> rooms;
  double width = 0.9;
};

/// Declarative floor plan in frame B. Rooms are axis-aligned rectangles bounded by the
/// inner faces of the four walls they reference.
struct FloorPlan {
  std::vector<PlanWall> walls;
  std::vector<PlanRoom> rooms;
  std::vector<PlanDoorway> doorways;

  const PlanWall& wall(const std::string& id) const;
  const PlanRoom& room(const std::string& id) const;
  std::optional<std::size_t> wall_index(const std::string& id) const;
  std::optional<std::size_t> room_index(const std::string& id) const;
};

/// Axis-aligned rectangle.
struct Box {
  double xmin = 0.0;
  double xmax = 0.0;
  double ymin = 0.0;
  double ymax = 0.0;

  Eigen::Vector2d center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  bool contains(const Eigen::Vector2d& p, double margin = 0.0) const {
    return p.x() >= xmin + margin && p.x() <= xmax - margin && p.y() >= ymin + margin &&
           p.y() <= ymax - margin;
  }
};

/// One face of a wall slab.
struct WallSurface {
  Plane plane;
  Eigen::Vector2d facing = Eigen::Vector2d::Zero();  // unit direction the face looks towards
  Eigen::Vector2d a = Eigen::Vector2d::Zero();       // face segment endpoints
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
};

struct WallSurfaces {
  std::string wall_id;
  WallSurface first;   // the face on the left of start -> end
  WallSurface second;  // the opposite face
  Axis axis = Axis::X;
};

/// Two faces per wall, offset ±thickness/2 from the centerline, normalised away from the
/// origin. Follows the order of plan.walls.
std::vector<WallSurfaces> extract_wall_surfaces(const FloorPlan& plan);
WallSurfaces wall_surfaces(const PlanWall& wall);

/// Face of the wall on `side` of the room that looks into the room.
WallSurface room_surface(const FloorPlan& plan, const PlanRoom& room, Side side);
/// Interior rectangle of a room (between the inner faces).
Box room_box(const FloorPlan& plan, const PlanRoom& room);

/// Wall referenced by both rooms of a doorway; empty when there is none.
std::optional<std::string> doorway_wall(const FloorPlan& plan, const PlanDoorway& doorway);

/// Throws ValidationError naming the offending id.
void validate_plan(const FloorPlan& plan);

/// Parses and validates. Schema errors name the JSON field path.
FloorPlan plan_from_json(const nlohmann::json& doc);
nlohmann::json plan_to_json(const FloorPlan& plan);
/// Syntax errors carry line:column.
FloorPlan load_plan(const std::filesystem::path& path);
void save_plan(const std::filesystem::path& path, const FloorPlan& plan);

}  // namespace planloc
