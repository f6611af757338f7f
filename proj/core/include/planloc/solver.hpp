#pragma once

#include <functional>
#include <map>
#include <span>
#include <vector>

#include "planloc/factor_graph.hpp"
#include "planloc/factors.hpp"

namespace planloc {

struct SolverConfig {
  int max_iterations = 100;
  double initial_lambda = 1e-4;
  double lambda_up = 10.0;
  double lambda_down = 0.5;
  double rel_tol = 1e-9;
  double abs_tol = 1e-10;

  /// Throws InvalidInput unless every field is positive and lambda_up > 1 > lambda_down.
  void validate() const;
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  /// Cost before the first iteration followed by the cost after every accepted step.
  std::vector<double> cost_history;
  std::map<FactorId, double> chi2_per_factor;
  std::string message;
};

/// Levenberg-Marquardt over every non-fixed variable, updating values in place.
/// Throws GaugeFreedomError when the graph has neither a Prior factor nor a fixed variable.
SolveReport optimize(FactorGraph& graph, const SolverConfig& config = {});

/// Maps a (phi, d) plane variable to its representative with d >= 0.
Eigen::Vector2d canonical_plane(const Eigen::Vector2d& value);

/// Analytic linearisation hook; the default is planloc::linearize.
using JacobianProvider = std::function<Linearization(
    const Factor&, std::span<const VariableKind>, std::span<const Eigen::VectorXd>)>;

struct JacobianCheck {
  FactorId factor;
  double max_relative_error = 0.0;
};

/// Max relative error |J_analytic − J_fd| / max(1, |J_fd|) for every factor, using central
/// differences with step 1e-6 and wrapped angular residual differences.
std::vector<JacobianCheck> jacobian_errors(const FactorGraph& graph,
                                           const JacobianProvider& provider = {});

/// Factors whose max relative Jacobian error exceeds `tolerance`.
std::vector<JacobianCheck> check_jacobians(const FactorGraph& graph, double tolerance = 1e-5,
                                           const JacobianProvider& provider = {});

}  // namespace planloc
