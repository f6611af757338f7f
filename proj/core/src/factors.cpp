#include "planloc/factors.hpp"

#include <cmath>
#include <numbers>

#include "planloc/errors.hpp"

namespace planloc {
namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// d/dα R(α) = R(α) S with S the 90° rotation generator.
const Eigen::Matrix2d kGenerator = (Eigen::Matrix2d() << 0.0, -1.0, 1.0, 0.0).finished();

Linearization odometry(const Vec& z, std::span<const Vec> v, bool jac) {
  const Eigen::Vector2d t1 = v[0].head<2>();
  const Eigen::Vector2d t2 = v[1].head<2>();
  const double a = v[0](2);
  const double b = v[1](2);
  const Eigen::Vector2d zt = z.head<2>();

  // (x1⁻¹ x2)⁻¹ ∘ z, written out: R(a-b) z_t − R(-b)(t2 − t1), z_θ − b + a.
  const Eigen::Matrix2d r_ab = rotation(a - b);
  const Eigen::Matrix2d r_b = rotation(-b);
  const Eigen::Vector2d delta = t2 - t1;

  Linearization out;
  out.residual.resize(3);
  out.residual.head<2>() = r_ab * zt - r_b * delta;
  out.residual(2) = wrap_angle(z(2) - b + a);
  if (!jac) return out;

  Mat j1 = Mat::Zero(3, 3);
  j1.block<2, 2>(0, 0) = r_b;
  j1.block<2, 1>(0, 2) = r_ab * kGenerator * zt;
  j1(2, 2) = 1.0;

  Mat j2 = Mat::Zero(3, 3);
  j2.block<2, 2>(0, 0) = -r_b;
  j2.block<2, 1>(0, 2) = -r_ab * kGenerator * zt + r_b * kGenerator * delta;
  j2(2, 2) = -1.0;

  out.jacobians = {std::move(j1), std::move(j2)};
  return out;
}

Linearization pose_plane(const Vec& z, std::span<const Vec> v, bool jac) {
  const double x = v[0](0);
  const double y = v[0](1);
  const double theta = v[0](2);
  const double phi = v[1](0);
  const double d = v[1](1);
  const double c = std::cos(phi);
  const double s = std::sin(phi);

  double phi_body = phi - theta;
  double d_body = d - c * x - s * y;
  double sign = 1.0;
  // Pick the (φ, d) / (φ+π, −d) representative facing the same way as the measurement.
  if (std::cos(phi_body - z(0)) < 0.0) {
    phi_body += std::numbers::pi;
    d_body = -d_body;
    sign = -1.0;
  }

  Linearization out;
  out.residual.resize(2);
  out.residual << wrap_angle(phi_body - z(0)), d_body - z(1);
  if (!jac) return out;

  Mat jk(2, 3);
  jk << 0.0, 0.0, -1.0, -sign * c, -sign * s, 0.0;
  Mat jp(2, 2);
  jp << 1.0, 0.0, sign * (s * x - c * y), sign;
  out.jacobians = {std::move(jk), std::move(jp)};
  return out;
}

Linearization room_to_walls(std::span<const Vec> v, bool jac) {
  const auto x_pair = plane_math::surface_midpoint(v[1](0), v[1](1), v[2](0), v[2](1));
  const auto y_pair = plane_math::surface_midpoint(v[3](0), v[3](1), v[4](0), v[4](1));

  Linearization out;
  out.residual = v[0].head<2>() - x_pair.value - y_pair.value;
  if (!jac) return out;

  out.jacobians.reserve(5);
  out.jacobians.push_back(Mat::Identity(2, 2));
  out.jacobians.push_back(-x_pair.jacobian.leftCols<2>());
  out.jacobians.push_back(-x_pair.jacobian.rightCols<2>());
  out.jacobians.push_back(-y_pair.jacobian.leftCols<2>());
  out.jacobians.push_back(-y_pair.jacobian.rightCols<2>());
  return out;
}

Linearization wall_center(const Vec& z, std::span<const Vec> v, bool jac) {
  const auto center = plane_math::wall_center(v[1](0), v[1](1), v[2](0), v[2](1), z.head<2>());

  Linearization out;
  out.residual = v[0].head<2>() - center.value;
  if (!jac) return out;

  out.jacobians = {Mat::Identity(2, 2), -center.jacobian.leftCols<2>(),
                   -center.jacobian.rightCols<2>()};
  return out;
}

Linearization doorway_to_rooms(const Vec& z, std::span<const Vec> v, bool jac) {
  // f(ρ, ᵖD) = ρ + ᵖD, the doorway position predicted from each room.
  Linearization out;
  out.residual = (v[1].head<2>() + z.head<2>()) - (v[2].head<2>() + z.tail<2>());
  if (!jac) return out;

  out.jacobians = {Mat::Zero(2, 2), Mat::Identity(2, 2), -Mat::Identity(2, 2)};
  return out;
}

Linearization room_to_room(std::span<const Vec> v, bool jac) {
  const Eigen::Vector2d plan_room = v[0].head<2>();
  const Eigen::Vector2d map_room = v[1].head<2>();
  const bool has_transform = v.size() == 3;
  const Pose2 transform = has_transform ? Pose2::from_vector(v[2]) : Pose2::identity();
  const Eigen::Matrix2d r = transform.rotation();

  Linearization out;
  out.residual = r * map_room + transform.translation() - plan_room;
  if (!jac) return out;

  out.jacobians = {-Mat::Identity(2, 2), Mat(r)};
  if (has_transform) {
    Mat jt(2, 3);
    jt.leftCols<2>() = Eigen::Matrix2d::Identity();
    jt.col(2) = r * kGenerator * map_room;
    out.jacobians.push_back(std::move(jt));
  }
  return out;
}

Linearization plane_to_plane(std::span<const Vec> v, bool jac) {
  const double phi_plan = v[0](0);
  const double d_plan = v[0](1);
  const bool has_transform = v.size() == 3;
  const Pose2 transform = has_transform ? Pose2::from_vector(v[2]) : Pose2::identity();
  const Eigen::Vector2d t = transform.translation();

  double phi = v[1](0) + transform.theta;
  const Eigen::Vector2d n = plane_math::normal(phi);
  const Eigen::Vector2d dn = plane_math::normal_derivative(phi);
  double d = v[1](1) + n.dot(t);
  double sign = 1.0;
  if (std::cos(phi - phi_plan) < 0.0) {
    phi += std::numbers::pi;
    d = -d;
    sign = -1.0;
  }

  Linearization out;
  out.residual.resize(2);
  out.residual << wrap_angle(phi - phi_plan), d - d_plan;
  if (!jac) return out;

  Mat jp = -Mat::Identity(2, 2);
  Mat jm(2, 2);
  jm << 1.0, 0.0, sign * dn.dot(t), sign;
  out.jacobians = {std::move(jp), std::move(jm)};
  if (has_transform) {
    Mat jt(2, 3);
    jt << 0.0, 0.0, 1.0, sign * n.x(), sign * n.y(), sign * dn.dot(t);
    out.jacobians.push_back(std::move(jt));
  }
  return out;
}

Linearization prior(VariableKind kind, const Vec& z, std::span<const Vec> v, bool jac) {
  Vec value = v[0];
  Mat j = Mat::Identity(value.size(), value.size());
  if (kind == VariableKind::PlaneVar && std::cos(value(0) - z(0)) < 0.0) {
    value(0) += std::numbers::pi;
    value(1) = -value(1);
    j(1, 1) = -1.0;
  }
  Linearization out;
  out.residual = value - z;
  for (int i : angular_variable_components(kind)) out.residual(i) = wrap_angle(out.residual(i));
  if (jac) out.jacobians = {std::move(j)};
  return out;
}

Linearization floor_to_room(const Vec& z, std::span<const Vec> v, bool jac) {
  Linearization out;
  out.residual = (v[1].head<2>() - v[0].head<2>()) - z.head<2>();
  if (jac) out.jacobians = {-Mat::Identity(2, 2), Mat::Identity(2, 2)};
  return out;
}

}  // namespace

int residual_dimension(FactorKind kind) {
  switch (kind) {
    case FactorKind::Odometry:
      return 3;
    case FactorKind::Prior:
      return -1;  // dimension of the constrained variable
    default:
      return 2;
  }
}

std::vector<int> angular_variable_components(VariableKind kind) {
  switch (kind) {
    case VariableKind::Keyframe:
    case VariableKind::Transform:
      return {2};
    case VariableKind::PlaneVar:
      return {0};
    default:
      return {};
  }
}

std::vector<int> angular_residual_components(FactorKind kind,
                                             std::span<const VariableKind> variable_kinds) {
  switch (kind) {
    case FactorKind::Odometry:
      return {2};
    case FactorKind::PosePlane:
    case FactorKind::PlaneToPlane:
      return {0};
    case FactorKind::Prior:
      return variable_kinds.empty() ? std::vector<int>{}
                                    : angular_variable_components(variable_kinds.front());
    default:
      return {};
  }
}

Linearization linearize(FactorKind kind, const Eigen::VectorXd& measurement,
                        std::span<const VariableKind> variable_kinds,
                        std::span<const Eigen::VectorXd> values, bool with_jacobians) {
  switch (kind) {
    case FactorKind::Odometry:
      return odometry(measurement, values, with_jacobians);
    case FactorKind::PosePlane:
      return pose_plane(measurement, values, with_jacobians);
    case FactorKind::RoomToWalls:
      return room_to_walls(values, with_jacobians);
    case FactorKind::WallCenter:
      return wall_center(measurement, values, with_jacobians);
    case FactorKind::DoorwayToRooms:
      return doorway_to_rooms(measurement, values, with_jacobians);
    case FactorKind::RoomToRoom:
      return room_to_room(values, with_jacobians);
    case FactorKind::PlaneToPlane:
      return plane_to_plane(values, with_jacobians);
    case FactorKind::Prior:
      return prior(variable_kinds.front(), measurement, values, with_jacobians);
    case FactorKind::FloorToRoom:
      return floor_to_room(measurement, values, with_jacobians);
  }
  throw InvalidInput("unknown factor kind");
}

namespace plane_math {

Eigen::Vector2d normal(double phi) { return {std::cos(phi), std::sin(phi)}; }

Eigen::Vector2d normal_derivative(double phi) { return {-std::sin(phi), std::cos(phi)}; }

PointWithJacobian surface_midpoint(double phi1, double d1, double phi2, double d2) {
  const Eigen::Vector2d n1 = normal(phi1);
  const Eigen::Vector2d n2 = normal(phi2);
  PointWithJacobian out;
  out.value = 0.5 * (d1 * n1 + d2 * n2);
  out.jacobian.col(0) = 0.5 * d1 * normal_derivative(phi1);
  out.jacobian.col(1) = 0.5 * n1;
  out.jacobian.col(2) = 0.5 * d2 * normal_derivative(phi2);
  out.jacobian.col(3) = 0.5 * n2;
  return out;
}

PointWithJacobian wall_center(double phi1, double d1, double phi2, double d2,
                              const Eigen::Vector2d& start) {
  PointWithJacobian out = surface_midpoint(phi1, d1, phi2, d2);

  const Eigen::Vector2d n1 = normal(phi1);
  const Eigen::Vector2d n2 = normal(phi2);
  const double sign = n1.dot(n2) >= 0.0 ? 1.0 : -1.0;
  const Eigen::Vector2d u = n1 + sign * n2;
  const double u_norm = u.norm();
  const Eigen::Vector2d w_hat = u / u_norm;
  const double s_dot_w = start.dot(w_hat);

  out.value += start - s_dot_w * w_hat;

  // d/dŵ [s − (s·ŵ)ŵ] = −(ŵ sᵀ + (s·ŵ) I);  dŵ/du = (I − ŵŵᵀ)/‖u‖.
  const Eigen::Matrix2d d_proj =
      -(w_hat * start.transpose() + s_dot_w * Eigen::Matrix2d::Identity());
  const Eigen::Matrix2d d_what =
      (Eigen::Matrix2d::Identity() - w_hat * w_hat.transpose()) / u_norm;
  const Eigen::Matrix2d chain = d_proj * d_what;
  out.jacobian.col(0) += chain * normal_derivative(phi1);
  out.jacobian.col(2) += chain * (sign * normal_derivative(phi2));
  return out;
}

}  // namespace plane_math
}  // namespace planloc
