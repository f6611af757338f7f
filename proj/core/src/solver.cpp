#include "planloc/solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "planloc/errors.hpp"

namespace planloc {
namespace {

struct Block {
  VariableId id;
  int offset = 0;
  int dim = 0;
};

struct Layout {
  std::map<VariableId, Block> blocks;
  int size = 0;
};

Layout make_layout(const FactorGraph& graph) {
  Layout layout;
  for (const auto& [id, var] : graph.variables()) {
    if (var.fixed || graph.factors_of(id).empty()) continue;
    const int dim = static_cast<int>(var.value.size());
    layout.blocks.emplace(id, Block{id, layout.size, dim});
    layout.size += dim;
  }
  return layout;
}

struct FactorInputs {
  std::vector<VariableKind> kinds;
  std::vector<Eigen::VectorXd> values;
};

FactorInputs gather(const Factor& factor, const FactorGraph& graph) {
  FactorInputs in;
  for (const auto& vid : factor.variables) {
    in.kinds.push_back(vid.kind);
    in.values.push_back(graph.value(vid));
  }
  return in;
}

struct System {
  Eigen::SparseMatrix<double> hessian;
  Eigen::VectorXd gradient;
  double cost = 0.0;
};

System build_system(const FactorGraph& graph, const Layout& layout) {
  std::vector<Eigen::Triplet<double>> triplets;
  System sys;
  sys.gradient = Eigen::VectorXd::Zero(layout.size);

  for (const auto& [fid, factor] : graph.factors()) {
    std::vector<const Block*> blocks;
    bool any_free = false;
    for (const auto& vid : factor.variables) {
      const auto it = layout.blocks.find(vid);
      blocks.push_back(it == layout.blocks.end() ? nullptr : &it->second);
      any_free = any_free || it != layout.blocks.end();
    }
    const FactorInputs in = gather(factor, graph);
    const Linearization lin = linearize(factor.kind(), factor.measurement, in.kinds, in.values,
                                        any_free);
    const Eigen::VectorXd weighted = factor.information * lin.residual;
    sys.cost += lin.residual.dot(weighted);
    if (!any_free) continue;

    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (!blocks[i]) continue;
      const Eigen::MatrixXd jt_info = lin.jacobians[i].transpose() * factor.information;
      sys.gradient.segment(blocks[i]->offset, blocks[i]->dim) += jt_info * lin.residual;
      for (std::size_t j = 0; j < blocks.size(); ++j) {
        if (!blocks[j]) continue;
        const Eigen::MatrixXd h = jt_info * lin.jacobians[j];
        for (int r = 0; r < h.rows(); ++r) {
          for (int c = 0; c < h.cols(); ++c) {
            triplets.emplace_back(blocks[i]->offset + r, blocks[j]->offset + c, h(r, c));
          }
        }
      }
    }
  }
  // Keep the diagonal structurally present for damping.
  for (int i = 0; i < layout.size; ++i) triplets.emplace_back(i, i, 0.0);
  sys.hessian.resize(layout.size, layout.size);
  sys.hessian.setFromTriplets(triplets.begin(), triplets.end());
  return sys;
}

std::map<VariableId, Eigen::VectorXd> snapshot(const FactorGraph& graph, const Layout& layout) {
  std::map<VariableId, Eigen::VectorXd> values;
  for (const auto& [id, block] : layout.blocks) values.emplace(id, graph.value(id));
  return values;
}

void apply_step(FactorGraph& graph, const Layout& layout,
                const std::map<VariableId, Eigen::VectorXd>& base, const Eigen::VectorXd& step) {
  for (const auto& [id, block] : layout.blocks) {
    Eigen::VectorXd value = base.at(id) + step.segment(block.offset, block.dim);
    for (int i : angular_variable_components(id.kind)) value(i) = wrap_angle(value(i));
    graph.set_value(id, value);
  }
}

void canonicalize(FactorGraph& graph, const Layout& layout) {
  for (const auto& [id, block] : layout.blocks) {
    if (id.kind == VariableKind::PlaneVar) {
      graph.set_value(id, canonical_plane(graph.value(id)));
    }
  }
}

double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

void SolverConfig::validate() const {
  if (max_iterations <= 0 || !(initial_lambda > 0.0) || !(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw InvalidInput("solver config: iterations, initial lambda and tolerances must be positive");
  }
  if (!(lambda_up > 1.0) || !(lambda_down > 0.0) || !(lambda_down < 1.0)) {
    throw InvalidInput("solver config: need lambda_up > 1 > lambda_down > 0");
  }
}

Eigen::Vector2d canonical_plane(const Eigen::Vector2d& value) {
  if (value(1) >= 0.0) return {wrap_angle(value(0)), value(1)};
  return {wrap_angle(value(0) + std::numbers::pi), -value(1)};
}

SolveReport optimize(FactorGraph& graph, const SolverConfig& config) {
  config.validate();
  SolveReport report;

  const bool has_prior = !graph.factors_of(FactorKind::Prior).empty();
  const bool has_fixed = std::any_of(graph.variables().begin(), graph.variables().end(),
                                     [](const auto& kv) { return kv.second.fixed; });
  if (graph.num_factors() > 0 && !has_prior && !has_fixed) {
    throw GaugeFreedomError("graph has no prior factor and no fixed variable");
  }

  const Layout layout = make_layout(graph);
  report.initial_cost = graph.total_cost();
  report.final_cost = report.initial_cost;
  report.cost_history.push_back(report.initial_cost);

  auto finish = [&](bool converged, std::string message) {
    report.converged = converged;
    report.message = std::move(message);
    report.final_cost = graph.total_cost();
    for (const auto& [fid, factor] : graph.factors()) {
      report.chi2_per_factor[fid] = factor_cost(factor, graph);
    }
    return report;
  };

  if (layout.size == 0) return finish(true, "no free variables");

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  bool analyzed = false;
  double lambda = config.initial_lambda;

  System sys = build_system(graph, layout);
  double cost = sys.cost;

  while (report.iterations < config.max_iterations) {
    if (cost <= config.abs_tol) return finish(true, "cost below absolute tolerance");
    if (max_abs(sys.gradient) <= config.abs_tol) return finish(true, "gradient below tolerance");
    ++report.iterations;

    Eigen::VectorXd diag = sys.hessian.diagonal();
    const auto base = snapshot(graph, layout);
    bool accepted = false;

    while (!accepted) {
      Eigen::SparseMatrix<double> damped = sys.hessian;
      for (int i = 0; i < layout.size; ++i) {
        damped.coeffRef(i, i) += lambda * std::max(diag(i), 1e-6);
      }
      if (!analyzed) {
        solver.analyzePattern(damped);
        analyzed = true;
      }
      solver.factorize(damped);
      Eigen::VectorXd step;
      if (solver.info() == Eigen::Success) {
        step = solver.solve(-sys.gradient);
      }
      if (solver.info() != Eigen::Success || !step.allFinite()) {
        lambda *= config.lambda_up;
        if (lambda > 1e16) return finish(false, "linear solve failed after lambda escalation");
        continue;
      }

      apply_step(graph, layout, base, step);
      canonicalize(graph, layout);
      const double new_cost = graph.total_cost();
      if (std::isfinite(new_cost) && new_cost < cost) {
        accepted = true;
        lambda = std::max(lambda * config.lambda_down, 1e-12);
        const double decrease = (cost - new_cost) / std::max(cost, 1e-300);
        cost = new_cost;
        report.cost_history.push_back(cost);
        if (decrease <= config.rel_tol) return finish(true, "relative decrease below tolerance");
        sys = build_system(graph, layout);
        cost = sys.cost;
      } else {
        apply_step(graph, layout, base, Eigen::VectorXd::Zero(layout.size));
        const double step_size = max_abs(step);
        const double state_size = std::max(1.0, [&] {
          double m = 0.0;
          for (const auto& [id, v] : base) m = std::max(m, max_abs(v));
          return m;
        }());
        if (step_size <= 1e-14 * state_size ||
            (std::isfinite(new_cost) && std::abs(new_cost - cost) <= config.rel_tol * cost)) {
          return finish(true, "no further decrease possible");
        }
        lambda *= config.lambda_up;
        if (lambda > 1e16) return finish(false, "lambda exceeded its upper bound");
      }
    }
  }
  return finish(false, "maximum iterations reached");
}

std::vector<JacobianCheck> jacobian_errors(const FactorGraph& graph,
                                           const JacobianProvider& provider) {
  constexpr double kStep = 1e-6;
  std::vector<JacobianCheck> out;
  for (const auto& [fid, factor] : graph.factors()) {
    FactorInputs in = gather(factor, graph);
    const Linearization analytic =
        provider ? provider(factor, in.kinds, in.values)
                 : linearize(factor.kind(), factor.measurement, in.kinds, in.values, true);
    const auto angular = angular_residual_components(factor.kind(), in.kinds);

    double worst = 0.0;
    for (std::size_t v = 0; v < in.values.size(); ++v) {
      const Eigen::VectorXd original = in.values[v];
      for (int k = 0; k < original.size(); ++k) {
        in.values[v] = original;
        in.values[v](k) += kStep;
        const Eigen::VectorXd plus =
            linearize(factor.kind(), factor.measurement, in.kinds, in.values, false).residual;
        in.values[v] = original;
        in.values[v](k) -= kStep;
        const Eigen::VectorXd minus =
            linearize(factor.kind(), factor.measurement, in.kinds, in.values, false).residual;
        in.values[v] = original;

        Eigen::VectorXd diff = plus - minus;
        for (int i : angular) diff(i) = wrap_angle(diff(i));
        const Eigen::VectorXd numeric = diff / (2.0 * kStep);
        for (int r = 0; r < numeric.size(); ++r) {
          const double a = analytic.jacobians.at(v)(r, k);
          const double err = std::abs(a - numeric(r)) / std::max(1.0, std::abs(numeric(r)));
          worst = std::max(worst, err);
        }
      }
    }
    out.push_back({fid, worst});
  }
  return out;
}

std::vector<JacobianCheck> check_jacobians(const FactorGraph& graph, double tolerance,
                                           const JacobianProvider& provider) {
  std::vector<JacobianCheck> offending;
  for (const auto& check : jacobian_errors(graph, provider)) {
    if (!(check.max_relative_error <= tolerance)) offending.push_back(check);
  }
  return offending;
}

}  // namespace planloc
