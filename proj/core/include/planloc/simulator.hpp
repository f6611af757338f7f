#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "planloc/floor_plan.hpp"

namespace planloc {

struct SimConfig {
  std::vector<Eigen::Vector2d> waypoints;  // frame B
  double keyframe_spacing = 0.5;
  double sigma_xy = 0.01;                  // odometry, metres per step
  double sigma_theta = 0.2 * 0.017453292519943295;  // odometry, radians per step
  double sigma_phi = 0.3 * 0.017453292519943295;    // plane azimuth, radians
  double sigma_d = 0.02;                   // plane distance, metres
  double sensor_range = 12.0;
  std::uint64_t seed = 0;
  /// True map->plan transform. When unset the map frame starts at the first pose.
  std::optional<Pose2> map_offset;
  /// Stop after this many steps (0 = whole path).
  int max_steps = 0;

  /// Throws InvalidInput on negative noise, non-positive spacing/range or < 2 waypoints.
  void validate() const;
};

/// A contiguous visible stretch of a wall surface, in the body frame.
struct Segment {
  Eigen::Vector2d a = Eigen::Vector2d::Zero();
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
};

struct PlaneObservation {
  /// Observed surface in the body frame, normalised away from the sensor.
  Plane plane;
  /// Unit direction the surface looks towards (towards the sensor), body frame.
  Eigen::Vector2d facing = Eigen::Vector2d::Zero();
  std::vector<Segment> segments;
  /// Source surface in the plan (wall id, face index). Ground-truth side channel.
  std::string wall_id;
  int face = 0;
};

struct SimStep {
  int index = 0;
  Pose2 ground_truth;               // frame B
  std::optional<Pose2> odometry;    // noisy relative motion from the previous step
  std::vector<PlaneObservation> observations;
};

/// Samples the waypoint polyline every `spacing` metres; heading follows the segment.
std::vector<Pose2> sample_path(const std::vector<Eigen::Vector2d>& waypoints, double spacing);

/// True when `p` lies inside a room interior or a doorway opening.
bool in_free_space(const FloorPlan& plan, const Eigen::Vector2d& p);

/// Throws InvalidInput naming the first point (checked every 2 cm) that leaves free space.
void check_path_free(const FloorPlan& plan, const std::vector<Eigen::Vector2d>& waypoints);

/// Noise-free observations of every surface with at least 3 visible 0.25 m samples.
std::vector<PlaneObservation> observe(const FloorPlan& plan, const Pose2& pose, double range);

struct Scene;

/// Deterministic measurement stream along the configured path.
class Simulator {
 public:
  Simulator(FloorPlan plan, SimConfig config);

  bool done() const { return next_ >= poses_.size(); }
  std::size_t num_steps() const { return poses_.size(); }
  SimStep step();

  const std::vector<Pose2>& ground_truth() const { return poses_; }
  /// The true ^B x_M.
  Pose2 map_offset() const { return offset_; }
  /// First pose expressed in the map frame: offset^-1 ∘ first ground-truth pose.
  Pose2 initial_map_pose() const;
  const FloorPlan& plan() const { return plan_; }
  const SimConfig& config() const { return config_; }

 private:
  FloorPlan plan_;
  SimConfig config_;
  std::shared_ptr<const Scene> scene_;
  std::vector<Pose2> poses_;
  Pose2 offset_;
  std::size_t next_ = 0;
  std::mt19937_64 rng_;
};

}  // namespace planloc
