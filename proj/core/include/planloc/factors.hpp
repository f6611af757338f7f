#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "planloc/factor_graph.hpp"

namespace planloc {

/// Residual and the Jacobian of the residual with respect to every variable of a factor,
/// in the order of Factor::variables.
struct Linearization {
  Eigen::VectorXd residual;
  std::vector<Eigen::MatrixXd> jacobians;
};

int residual_dimension(FactorKind kind);

/// Indices of residual components that are angles (differences are wrapped).
std::vector<int> angular_residual_components(FactorKind kind,
                                             std::span<const VariableKind> variable_kinds);

/// Indices of variable components that are angles.
std::vector<int> angular_variable_components(VariableKind kind);

/// Analytic residual and Jacobians. `values` and `variable_kinds` follow the factor's
/// variable order; no frame checking is done here.
Linearization linearize(FactorKind kind, const Eigen::VectorXd& measurement,
                        std::span<const VariableKind> variable_kinds,
                        std::span<const Eigen::VectorXd> values, bool with_jacobians = true);

/// Closed-form maps shared by the wall, room and two-wall-room factors. Planes are given
/// as (phi, d) with unit normal n(phi) = (cos phi, sin phi).
namespace plane_math {

Eigen::Vector2d normal(double phi);
/// dn/dphi.
Eigen::Vector2d normal_derivative(double phi);

struct PointWithJacobian {
  Eigen::Vector2d value;
  Eigen::Matrix<double, 2, 4> jacobian;  // w.r.t. (phi1, d1, phi2, d2)
};

/// Midpoint between the closest points of two parallel surfaces: ½(d1 n1 + d2 n2).
/// For two opposed surfaces this is the point of the middle surface nearest the origin.
PointWithJacobian surface_midpoint(double phi1, double d1, double phi2, double d2);

/// Wall center from two opposed surfaces and the wall's start point s: the surface
/// midpoint w, moved along the wall by the component of s orthogonal to the wall's
/// normal direction ŵ. ŵ is the mean of the two (sign-aligned) normals, which equals
/// w/‖w‖ whenever w ≠ 0.
PointWithJacobian wall_center(double phi1, double d1, double phi2, double d2,
                              const Eigen::Vector2d& start);

}  // namespace plane_math

}  // namespace planloc
