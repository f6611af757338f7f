#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "planloc/factor_graph.hpp"
#include "planloc/simulator.hpp"
#include "planloc/solver.hpp"

namespace planloc {

struct SGraphConfig {
  InformationDefaults information;
  SolverConfig solver;
  double assoc_max_dphi = 0.15;  // radians, sign-invariant
  double assoc_max_dd = 0.35;    // metres
  double room_min_gap = 1.0;
  double room_max_gap = 15.0;
  /// Max |n1·n2| for two surface pairs to count as perpendicular.
  double perpendicular_tolerance = 0.15;
  int two_wall_min_keyframes = 3;
  double extent_merge_gap = 1.0;
  double duplicate_room_distance = 0.5;
  bool optimize_each_update = true;
};

/// Interval [lo, hi] along a plane's tangent (-n_y, n_x).
using Interval = std::pair<double, double>;

struct PlaneSighting {
  VariableId keyframe;
  std::vector<Segment> segments;  // body frame of `keyframe`
};

struct PlaneRecord {
  VariableId id;
  /// Direction the surface looks towards, frame M.
  Eigen::Vector2d facing = Eigen::Vector2d::Zero();
  std::vector<PlaneSighting> sightings;
  std::set<VariableId> keyframes;
  /// Plan surface of the first associated observation (ground-truth side channel).
  std::string source_wall;
  int source_face = 0;
};

struct Association {
  std::size_t observation = 0;
  VariableId plane;
  bool created = false;
};

struct RoomDetection {
  std::vector<VariableId> rooms;
  std::vector<VariableId> two_wall_rooms;
  std::vector<VariableId> removed_two_wall_rooms;

  bool empty() const { return rooms.empty() && two_wall_rooms.empty() && removed_two_wall_rooms.empty(); }
};

struct UpdateInput {
  /// Relative motion from the previous keyframe; ignored for the first keyframe.
  std::optional<Pose2> odometry;
  std::vector<PlaneObservation> observations;
  /// Prior pose of the first keyframe in M (identity when unset).
  std::optional<Pose2> initial_pose;
  /// Ground-truth pose in B (side channel, never used for estimation).
  std::optional<Pose2> ground_truth;
};

struct UpdateReport {
  VariableId keyframe;
  std::vector<Association> associations;
  RoomDetection detection;
  std::optional<SolveReport> solve;
};

/// Online situational graph in frame M: keyframes, wall-surface planes, rooms, two-wall
/// rooms and one floor node.
class SGraph {
 public:
  explicit SGraph(SGraphConfig config = {});

  /// Keyframe + odometry (or prior) -> association -> pose-plane factors -> room
  /// detection -> floor -> optimisation.
  UpdateReport update(const UpdateInput& input);

  /// Adds a keyframe; the first one gets a Prior at `pose`, later ones an Odometry factor.
  VariableId add_keyframe(const Pose2& initial, const std::optional<Pose2>& odometry);

  /// Matches observations taken at `keyframe` against existing planes (or creates new
  /// ones) and records the sightings. Does not add factors.
  std::vector<Association> associate_planes(VariableId keyframe,
                                            const std::vector<PlaneObservation>& observations);

  /// Adds the pose-plane factors for `associations`.
  void add_plane_factors(VariableId keyframe, const std::vector<PlaneObservation>& observations,
                         const std::vector<Association>& associations);

  RoomDetection detect_rooms();
  /// Recreates the floor node at the centroid of the rooms with one factor per room.
  void update_floor();
  SolveReport optimize();

  const FactorGraph& graph() const { return graph_; }
  FactorGraph& graph() { return graph_; }
  const SGraphConfig& config() const { return config_; }

  const std::vector<VariableId>& keyframes() const { return keyframes_; }
  const std::map<VariableId, PlaneRecord>& planes() const { return planes_; }
  /// Ground-truth poses passed to update(), in keyframe order.
  const std::vector<Pose2>& ground_truth() const { return ground_truth_; }
  /// Four planes (+x, -x, +y, -y) per room and two planes per two-wall room.
  const std::map<VariableId, std::array<VariableId, 4>>& room_planes() const { return rooms_; }
  const std::map<VariableId, std::array<VariableId, 2>>& two_wall_planes() const { return two_wall_; }
  std::optional<VariableId> floor() const { return floor_; }

  /// Observed extent of a plane along its tangent, merged over gaps <= extent_merge_gap.
  std::vector<Interval> extent(VariableId plane) const;
  /// Extent of a plane as segments in M.
  std::vector<Segment> extent_segments(VariableId plane) const;
  Plane plane(VariableId id) const;
  Eigen::Vector2d facing(VariableId id) const;

 private:
  SGraphConfig config_;
  FactorGraph graph_;
  std::vector<VariableId> keyframes_;
  std::vector<Pose2> ground_truth_;
  std::map<VariableId, PlaneRecord> planes_;
  std::map<VariableId, std::array<VariableId, 4>> rooms_;
  std::map<VariableId, std::array<VariableId, 2>> two_wall_;
  std::optional<VariableId> floor_;
};

}  // namespace planloc
