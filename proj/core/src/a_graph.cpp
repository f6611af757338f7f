#include "planloc/a_graph.hpp"

#include "planloc/errors.hpp"
#include "planloc/factors.hpp"

namespace planloc {

Eigen::Vector2d plane_value(const Plane& plane) { return {plane.azimuth(), plane.dist}; }

Plane plane_from_value(const Eigen::VectorXd& value, Frame frame) {
  return normalize_away_from_origin(plane_math::normal(value(0)), value(1), frame);
}

Eigen::Vector2d compute_wall_center(const Plane& p1, const Plane& p2, const Eigen::Vector2d& s) {
  if (classify_axis(p1) != classify_axis(p2)) {
    throw InvalidInput("compute_wall_center: surfaces lie on different axes");
  }
  return plane_math::wall_center(p1.azimuth(), p1.dist, p2.azimuth(), p2.dist, s).value;
}

Eigen::Vector2d compute_room_center(const Plane& pos_x, const Plane& neg_x, const Plane& pos_y,
                                    const Plane& neg_y) {
  return plane_math::surface_midpoint(pos_x.azimuth(), pos_x.dist, neg_x.azimuth(), neg_x.dist)
             .value +
         plane_math::surface_midpoint(pos_y.azimuth(), pos_y.dist, neg_y.azimuth(), neg_y.dist)
             .value;
}

AGraph build_a_graph(const FloorPlan& plan, const InformationDefaults& info) {
  validate_plan(plan);
  AGraph a;
  auto& g = a.graph;
  const Eigen::MatrixXd structure = info.structure.asDiagonal();

  for (const auto& faces : extract_wall_surfaces(plan)) {
    const auto& wall = plan.wall(faces.wall_id);
    const VariableId p1 = g.add_variable(VariableKind::PlaneVar, plane_value(faces.first.plane),
                                         Frame::Plan);
    const VariableId p2 = g.add_variable(VariableKind::PlaneVar, plane_value(faces.second.plane),
                                         Frame::Plan);
    const Eigen::Vector2d center =
        compute_wall_center(faces.first.plane, faces.second.plane, wall.start);
    const VariableId w = g.add_variable(VariableKind::Wall, center, Frame::Plan);
    g.add_factor(FactorKind::WallCenter, {w, p1, p2}, wall.start, structure);
    a.walls[wall.id] = w;
    a.wall_planes[wall.id] = {p1, p2};
    a.plane_sources[p1] = {wall.id, 0};
    a.plane_sources[p2] = {wall.id, 1};
  }

  auto surface_var = [&](const PlanRoom& room, Side side) {
    const WallSurfaces faces = wall_surfaces(plan.wall(room.wall(side)));
    const WallSurface inner = room_surface(plan, room, side);
    const int face = inner.facing == faces.first.facing ? 0 : 1;
    return a.wall_planes.at(room.wall(side))[face];
  };

  for (const auto& room : plan.rooms) {
    std::array<VariableId, 4> planes{};
    std::array<Plane, 4> surfaces{};
    for (Side side : kSides) {
      planes[static_cast<int>(side)] = surface_var(room, side);
      surfaces[static_cast<int>(side)] = room_surface(plan, room, side).plane;
    }
    const Eigen::Vector2d center =
        compute_room_center(surfaces[0], surfaces[1], surfaces[2], surfaces[3]);
    const VariableId r = g.add_variable(VariableKind::Room, center, Frame::Plan);
    g.add_factor(FactorKind::RoomToWalls, {r, planes[0], planes[1], planes[2], planes[3]},
                 Eigen::VectorXd(0), structure);
    a.rooms[room.id] = r;
  }

  for (const auto& door : plan.doorways) {
    const VariableId r1 = a.rooms.at(door.rooms[0]);
    const VariableId r2 = a.rooms.at(door.rooms[1]);
    const VariableId d = g.add_variable(VariableKind::Doorway, door.position, Frame::Plan);
    Eigen::VectorXd offsets(4);
    offsets << door.position - g.value(r1), door.position - g.value(r2);
    g.add_factor(FactorKind::DoorwayToRooms, {d, r1, r2}, offsets, structure);
    a.doorways[door.id] = d;
  }

  if (!plan.rooms.empty()) {
    const VariableId first = a.rooms.at(plan.rooms.front().id);
    g.add_factor(FactorKind::Prior, {first}, g.value(first),
                 Eigen::MatrixXd::Identity(2, 2) * info.prior);
  }
  return a;
}

}  // namespace planloc
