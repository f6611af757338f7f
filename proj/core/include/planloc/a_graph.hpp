#pragma once

#include <array>
#include <map>
#include <string>

#include "planloc/factor_graph.hpp"
#include "planloc/floor_plan.hpp"

namespace planloc {

/// Architectural graph in frame B: wall-surface planes, walls, rooms and doorways.
struct AGraph {
  FactorGraph graph;
  std::map<std::string, VariableId> walls;
  /// Plane variables of each wall's (first, second) face.
  std::map<std::string, std::array<VariableId, 2>> wall_planes;
  std::map<std::string, VariableId> rooms;
  std::map<std::string, VariableId> doorways;
  /// Reverse provenance: plane variable -> (wall id, face index).
  std::map<VariableId, std::pair<std::string, int>> plane_sources;
};

/// Wall center from two parallel surfaces and the wall's start point s: the surface
/// midpoint w, plus the part of s orthogonal to the wall normal.
/// Throws InvalidInput when the planes lie on different axes.
Eigen::Vector2d compute_wall_center(const Plane& p1, const Plane& p2, const Eigen::Vector2d& s);

/// Room center predicted by four surfaces (midpoint per axis).
Eigen::Vector2d compute_room_center(const Plane& pos_x, const Plane& neg_x, const Plane& pos_y,
                                    const Plane& neg_y);

/// Plane variable value (phi, d).
Eigen::Vector2d plane_value(const Plane& plane);
Plane plane_from_value(const Eigen::VectorXd& value, Frame frame);

AGraph build_a_graph(const FloorPlan& plan, const InformationDefaults& info = {});

}  // namespace planloc
