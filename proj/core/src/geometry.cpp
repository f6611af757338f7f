#include "planloc/geometry.hpp"

#include <cmath>
#include <numbers>

#include "planloc/errors.hpp"

namespace planloc {

std::string_view to_string(Frame frame) { return frame == Frame::Map ? "M" : "B"; }

Frame frame_from_string(std::string_view text) {
  if (text == "M") return Frame::Map;
  if (text == "B") return Frame::Plan;
  throw ParseError("unknown frame tag '" + std::string(text) + "' (expected M or B)");
}

std::string_view to_string(Axis axis) { return axis == Axis::X ? "X" : "Y"; }

double wrap_angle(double angle) {
  constexpr double kPi = std::numbers::pi;
  if (angle > -kPi && angle <= kPi) return angle;
  double wrapped = std::remainder(angle, 2.0 * kPi);
  if (wrapped <= -kPi) wrapped += 2.0 * kPi;
  return wrapped;
}

Eigen::Matrix2d rotation(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

Eigen::Vector2d Pose2::apply(const Eigen::Vector2d& point) const {
  return rotation() * point + translation();
}

Pose2 Pose2::inverse() const {
  const Eigen::Vector2d t = -(rotation().transpose() * translation());
  return {t.x(), t.y(), -theta};
}

Pose2 compose(const Pose2& a, const Pose2& b) {
  const Eigen::Vector2d t = a.apply(b.translation());
  return {t.x(), t.y(), a.theta + b.theta};
}

Pose2 between(const Pose2& a, const Pose2& b) { return compose(a.inverse(), b); }

double Plane::azimuth() const { return std::atan2(normal.y(), normal.x()); }

Plane Plane::from_azimuth(double phi, double dist, Frame frame) {
  return {Eigen::Vector2d(std::cos(phi), std::sin(phi)), dist, frame};
}

Plane normalize_away_from_origin(const Eigen::Vector2d& normal, double dist, Frame frame) {
  const double norm = normal.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw InvalidInput("plane normal must have non-zero finite length");
  }
  Plane plane{normal / norm, dist / norm, frame};
  if (plane.dist < 0.0) {
    plane.normal = -plane.normal;
    plane.dist = -plane.dist;
  }
  return plane;
}

Axis classify_axis(const Plane& plane) {
  return std::abs(plane.normal.y()) > std::abs(plane.normal.x()) ? Axis::Y : Axis::X;
}

Plane transform_plane(const FrameTransform& t, const Plane& plane) {
  if (plane.frame != t.source) {
    throw InvalidInput("transform_plane: plane is in frame " + std::string(to_string(plane.frame)) +
                       " but the transform maps from " + std::string(to_string(t.source)));
  }
  // n'·(R p + t) = n·p + n'·t  with n' = R n.
  const Eigen::Vector2d normal = t.pose.rotation() * plane.normal;
  const double dist = plane.dist + normal.dot(t.pose.translation());
  return normalize_away_from_origin(normal, dist, t.target);
}

FrameTransform estimate_transform_closed_form(std::span<const PointPair> pairs, Frame source,
                                              Frame target) {
  if (pairs.size() < 2) {
    throw DegenerateInput("closed-form alignment needs at least 2 point pairs");
  }
  Eigen::Vector2d source_mean = Eigen::Vector2d::Zero();
  Eigen::Vector2d target_mean = Eigen::Vector2d::Zero();
  for (const auto& pair : pairs) {
    source_mean += pair.source;
    target_mean += pair.target;
  }
  source_mean /= static_cast<double>(pairs.size());
  target_mean /= static_cast<double>(pairs.size());

  double dot = 0.0;
  double cross = 0.0;
  double spread = 0.0;
  for (const auto& pair : pairs) {
    const Eigen::Vector2d s = pair.source - source_mean;
    const Eigen::Vector2d q = pair.target - target_mean;
    dot += s.dot(q);
    cross += s.x() * q.y() - s.y() * q.x();
    spread += s.squaredNorm();
  }
  if (spread <= 1e-18 * (1.0 + source_mean.squaredNorm())) {
    throw DegenerateInput("closed-form alignment: all source points coincide");
  }

  const double theta = std::atan2(cross, dot);
  const Eigen::Vector2d translation = target_mean - planloc::rotation(theta) * source_mean;
  return {Pose2(translation.x(), translation.y(), theta), source, target};
}

}  // namespace planloc
