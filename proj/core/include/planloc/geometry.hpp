#pragma once

#include <Eigen/Core>
#include <span>
#include <string_view>

namespace planloc {

/// Coordinate frames. Map is the robot's online frame M, Plan the architectural frame B.
enum class Frame { Map, Plan };

std::string_view to_string(Frame frame);
Frame frame_from_string(std::string_view text);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

Eigen::Matrix2d rotation(double angle);

/// Rigid planar pose. theta is kept in (-pi, pi].
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose2() = default;
  Pose2(double x_, double y_, double theta_) : x(x_), y(y_), theta(wrap_angle(theta_)) {}

  static Pose2 identity() { return {}; }
  static Pose2 from_vector(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

  Eigen::Vector2d translation() const { return {x, y}; }
  Eigen::Matrix2d rotation() const { return planloc::rotation(theta); }
  Eigen::Vector3d vector() const { return {x, y, theta}; }

  /// Maps a point expressed in this pose's local frame to the parent frame.
  Eigen::Vector2d apply(const Eigen::Vector2d& point) const;
  Pose2 inverse() const;

  bool operator==(const Pose2&) const = default;
};

/// a ∘ b: the pose b expressed in a's parent frame.
Pose2 compose(const Pose2& a, const Pose2& b);
inline Pose2 operator*(const Pose2& a, const Pose2& b) { return compose(a, b); }

/// a⁻¹ ∘ b, the pose of b relative to a.
Pose2 between(const Pose2& a, const Pose2& b);

enum class Axis { X, Y };

std::string_view to_string(Axis axis);

/// Vertical wall surface in closest-point form: points p with normal·p = dist.
/// dist >= 0 and the normal points away from the frame origin, so the closest
/// point of the plane to the origin is dist * normal.
struct Plane {
  Eigen::Vector2d normal{1.0, 0.0};
  double dist = 0.0;
  Frame frame = Frame::Plan;

  /// Azimuth φ of the closest-point triplet.
  double azimuth() const;
  /// Elevation θ of the closest-point triplet. Walls are vertical so this is always 0.
  double elevation() const { return 0.0; }
  /// The [φ, θ, d] closest-point triplet.
  Eigen::Vector3d cp_triplet() const { return {azimuth(), elevation(), dist}; }
  Eigen::Vector2d closest_point() const { return dist * normal; }
  double signed_distance(const Eigen::Vector2d& point) const { return normal.dot(point) - dist; }

  /// Builds a plane from azimuth/distance without normalising the sign of dist.
  static Plane from_azimuth(double phi, double dist, Frame frame);
};

/// Returns the plane {p : normal·p = dist} with dist >= 0 and a unit normal.
/// Throws InvalidInput for a zero-length normal.
Plane normalize_away_from_origin(const Eigen::Vector2d& normal, double dist,
                                 Frame frame = Frame::Plan);

/// X when |n_x| >= |n_y|, otherwise Y.
Axis classify_axis(const Plane& plane);

/// Rigid transform taking `source` frame coordinates to `target` frame coordinates.
struct FrameTransform {
  Pose2 pose;
  Frame source = Frame::Map;
  Frame target = Frame::Plan;

  static FrameTransform identity(Frame source = Frame::Map, Frame target = Frame::Plan) {
    return {Pose2::identity(), source, target};
  }

  FrameTransform inverse() const { return {pose.inverse(), target, source}; }
  Eigen::Vector2d apply(const Eigen::Vector2d& point) const { return pose.apply(point); }
};

/// Re-expresses `plane` (which must live in t.source) in t.target, normalised away
/// from the target origin.
Plane transform_plane(const FrameTransform& t, const Plane& plane);

struct PointPair {
  Eigen::Vector2d source;
  Eigen::Vector2d target;
};

/// Least-squares rigid alignment (no scale) minimising Σ‖target − T(source)‖².
/// Throws DegenerateInput for fewer than 2 pairs or coincident source points.
FrameTransform estimate_transform_closed_form(std::span<const PointPair> pairs,
                                              Frame source = Frame::Map,
                                              Frame target = Frame::Plan);

}  // namespace planloc
