#include "planloc/factor_graph.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <array>
#include <charconv>
#include <set>

#include "planloc/errors.hpp"
#include "planloc/factors.hpp"

namespace planloc {
namespace {

constexpr std::array<std::string_view, kVariableKindCount> kVariableNames = {
    "Keyframe", "PlaneVar", "Wall", "Room", "TwoWallRoom", "Doorway", "Floor", "Transform"};
constexpr std::array<std::string_view, kFactorKindCount> kFactorNames = {
    "Odometry",   "PosePlane",    "RoomToWalls", "WallCenter", "DoorwayToRooms",
    "RoomToRoom", "PlaneToPlane", "Prior",       "FloorToRoom"};

std::pair<std::string_view, std::uint32_t> split_id(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ParseError("malformed id '" + std::string(text) + "' (expected Kind:index)");
  }
  std::uint32_t index = 0;
  const auto digits = text.substr(colon + 1);
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
    throw ParseError("malformed id index in '" + std::string(text) + "'");
  }
  return {text.substr(0, colon), index};
}

// Allowed variable kinds per slot. A slot with several entries accepts any of them.
struct Signature {
  std::vector<std::vector<VariableKind>> slots;
  std::size_t optional_tail = 0;  // trailing slots that may be omitted
  int measurement_dim = 0;        // -1: dimension of the first variable
};

Signature signature(FactorKind kind) {
  using K = VariableKind;
  switch (kind) {
    case FactorKind::Odometry:
      return {{{K::Keyframe}, {K::Keyframe}}, 0, 3};
    case FactorKind::PosePlane:
      return {{{K::Keyframe}, {K::PlaneVar}}, 0, 2};
    case FactorKind::RoomToWalls:
      return {{{K::Room}, {K::PlaneVar}, {K::PlaneVar}, {K::PlaneVar}, {K::PlaneVar}}, 0, 0};
    case FactorKind::WallCenter:
      return {{{K::Wall, K::TwoWallRoom}, {K::PlaneVar}, {K::PlaneVar}}, 0, 2};
    case FactorKind::DoorwayToRooms:
      return {{{K::Doorway}, {K::Room}, {K::Room}}, 0, 4};
    case FactorKind::RoomToRoom:
      return {{{K::Room}, {K::Room}, {K::Transform}}, 1, 0};
    case FactorKind::PlaneToPlane:
      return {{{K::PlaneVar}, {K::PlaneVar}, {K::Transform}}, 1, 0};
    case FactorKind::Prior:
      return {{{K::Keyframe, K::PlaneVar, K::Wall, K::Room, K::TwoWallRoom, K::Doorway, K::Floor,
                K::Transform}},
              0,
              -1};
    case FactorKind::FloorToRoom:
      return {{{K::Floor}, {K::Room}}, 0, 2};
  }
  throw InvalidInput("unknown factor kind");
}

void check_frames(const Factor& factor, const std::vector<const Variable*>& vars) {
  if (factor.kind() != FactorKind::RoomToRoom && factor.kind() != FactorKind::PlaneToPlane) return;
  if (vars.size() == 3) {
    if (vars[0]->frame != Frame::Plan || vars[1]->frame != Frame::Map) {
      throw InvalidInput(std::string(to_string(factor.kind())) + " " + to_string(factor.id) +
                         ": expects a plan-frame entity first and a map-frame entity second");
    }
  } else if (vars[0]->frame != vars[1]->frame) {
    throw InvalidInput(std::string(to_string(factor.kind())) + " " + to_string(factor.id) +
                       ": entities live in different frames but no transform variable is given");
  }
}

}  // namespace

int dimension(VariableKind kind) {
  switch (kind) {
    case VariableKind::Keyframe:
    case VariableKind::Transform:
      return 3;
    default:
      return 2;
  }
}

std::string_view to_string(VariableKind kind) { return kVariableNames.at(static_cast<int>(kind)); }
std::string_view to_string(FactorKind kind) { return kFactorNames.at(static_cast<int>(kind)); }

VariableKind variable_kind_from_string(std::string_view text) {
  for (std::size_t i = 0; i < kVariableNames.size(); ++i) {
    if (kVariableNames[i] == text) return static_cast<VariableKind>(i);
  }
  throw ParseError("unknown variable kind '" + std::string(text) + "'");
}

FactorKind factor_kind_from_string(std::string_view text) {
  for (std::size_t i = 0; i < kFactorNames.size(); ++i) {
    if (kFactorNames[i] == text) return static_cast<FactorKind>(i);
  }
  throw ParseError("unknown factor kind '" + std::string(text) + "'");
}

std::string to_string(VariableId id) {
  return std::string(to_string(id.kind)) + ":" + std::to_string(id.index);
}

std::string to_string(FactorId id) {
  return std::string(to_string(id.kind)) + ":" + std::to_string(id.index);
}

VariableId parse_variable_id(std::string_view text) {
  const auto [kind, index] = split_id(text);
  return {variable_kind_from_string(kind), index};
}

FactorId parse_factor_id(std::string_view text) {
  const auto [kind, index] = split_id(text);
  return {factor_kind_from_string(kind), index};
}

VariableId FactorGraph::add_variable(VariableKind kind, const Eigen::VectorXd& value, Frame frame,
                                     bool fixed) {
  const VariableId id{kind, next_variable_[static_cast<int>(kind)]};
  insert_variable({id, value, frame, fixed});
  return id;
}

void FactorGraph::insert_variable(const Variable& variable) {
  if (variable.value.size() != dimension(variable.id.kind)) {
    throw InvalidInput("variable " + to_string(variable.id) + " expects dimension " +
                       std::to_string(dimension(variable.id.kind)) + ", got " +
                       std::to_string(variable.value.size()));
  }
  if (!variable.value.allFinite()) {
    throw InvalidInput("variable " + to_string(variable.id) + " has a non-finite value");
  }
  if (variables_.contains(variable.id)) {
    throw InvalidInput("duplicate variable id " + to_string(variable.id));
  }
  variables_.emplace(variable.id, variable);
  adjacency_[variable.id];
  auto& next = next_variable_[static_cast<int>(variable.id.kind)];
  next = std::max(next, variable.id.index + 1);
}

FactorId FactorGraph::add_factor(FactorKind kind, std::vector<VariableId> variables,
                                 Eigen::VectorXd measurement, Eigen::MatrixXd information) {
  const FactorId id{kind, next_factor_[static_cast<int>(kind)]};
  insert_factor({id, std::move(variables), std::move(measurement), std::move(information)});
  return id;
}

void FactorGraph::insert_factor(const Factor& factor) {
  if (factors_.contains(factor.id)) {
    throw InvalidInput("duplicate factor id " + to_string(factor.id));
  }
  validate_factor(factor);
  factors_.emplace(factor.id, factor);
  attach(factor);
  auto& next = next_factor_[static_cast<int>(factor.id.kind)];
  next = std::max(next, factor.id.index + 1);
}

void FactorGraph::validate_factor(const Factor& factor) const {
  const Signature sig = signature(factor.kind());
  const std::string name = to_string(factor.id);
  const std::size_t max_arity = sig.slots.size();
  const std::size_t min_arity = max_arity - sig.optional_tail;
  if (factor.variables.size() < min_arity || factor.variables.size() > max_arity) {
    throw InvalidInput(name + ": wrong number of variables (" +
                       std::to_string(factor.variables.size()) + ")");
  }
  std::set<VariableId> seen;
  std::vector<const Variable*> vars;
  for (std::size_t i = 0; i < factor.variables.size(); ++i) {
    const VariableId vid = factor.variables[i];
    if (!variables_.contains(vid)) {
      throw InvalidInput(name + ": references missing variable " + to_string(vid));
    }
    if (!seen.insert(vid).second) {
      throw InvalidInput(name + ": variable " + to_string(vid) + " appears twice");
    }
    const auto& allowed = sig.slots[i];
    if (std::find(allowed.begin(), allowed.end(), vid.kind) == allowed.end()) {
      throw InvalidInput(name + ": slot " + std::to_string(i) + " cannot hold " + to_string(vid));
    }
    vars.push_back(&variables_.at(vid));
  }
  check_frames(factor, vars);

  const int measurement_dim =
      sig.measurement_dim < 0 ? dimension(factor.variables.front().kind) : sig.measurement_dim;
  if (factor.measurement.size() != measurement_dim) {
    throw InvalidInput(name + ": measurement must have dimension " +
                       std::to_string(measurement_dim));
  }
  const int rdim = residual_dimension(factor.kind()) < 0 ? measurement_dim
                                                         : residual_dimension(factor.kind());
  const auto& info = factor.information;
  if (info.rows() != rdim || info.cols() != rdim) {
    throw InvalidInput(name + ": information matrix must be " + std::to_string(rdim) + "x" +
                       std::to_string(rdim));
  }
  if (!info.allFinite() || !info.isApprox(info.transpose(), 1e-12)) {
    throw InvalidInput(name + ": information matrix must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(info);
  if (llt.info() != Eigen::Success) {
    throw InvalidInput(name + ": information matrix is not positive definite");
  }
}

void FactorGraph::attach(const Factor& factor) {
  for (const auto& vid : factor.variables) {
    auto& list = adjacency_[vid];
    list.insert(std::upper_bound(list.begin(), list.end(), factor.id), factor.id);
  }
}

void FactorGraph::remove_factor(FactorId id) {
  const auto it = factors_.find(id);
  if (it == factors_.end()) throw InvalidInput("no factor " + to_string(id));
  for (const auto& vid : it->second.variables) {
    auto& list = adjacency_[vid];
    list.erase(std::remove(list.begin(), list.end(), id), list.end());
  }
  factors_.erase(it);
}

void FactorGraph::remove_variable(VariableId id) {
  if (!variables_.contains(id)) throw InvalidInput("no variable " + to_string(id));
  for (const auto fid : std::vector<FactorId>(adjacency_[id])) remove_factor(fid);
  adjacency_.erase(id);
  variables_.erase(id);
}

const Variable& FactorGraph::variable(VariableId id) const {
  const auto it = variables_.find(id);
  if (it == variables_.end()) throw InvalidInput("no variable " + to_string(id));
  return it->second;
}

const Factor& FactorGraph::factor(FactorId id) const {
  const auto it = factors_.find(id);
  if (it == factors_.end()) throw InvalidInput("no factor " + to_string(id));
  return it->second;
}

void FactorGraph::set_value(VariableId id, const Eigen::VectorXd& value) {
  const auto it = variables_.find(id);
  if (it == variables_.end()) throw InvalidInput("no variable " + to_string(id));
  if (value.size() != it->second.value.size()) {
    throw InvalidInput("set_value: dimension mismatch for " + to_string(id));
  }
  it->second.value = value;
}

void FactorGraph::set_fixed(VariableId id, bool fixed) {
  const auto it = variables_.find(id);
  if (it == variables_.end()) throw InvalidInput("no variable " + to_string(id));
  it->second.fixed = fixed;
}

std::vector<VariableId> FactorGraph::variables_of(VariableKind kind) const {
  std::vector<VariableId> out;
  for (auto it = variables_.lower_bound({kind, 0});
       it != variables_.end() && it->first.kind == kind; ++it) {
    out.push_back(it->first);
  }
  return out;
}

std::vector<FactorId> FactorGraph::factors_of(FactorKind kind) const {
  std::vector<FactorId> out;
  for (auto it = factors_.lower_bound({kind, 0}); it != factors_.end() && it->first.kind == kind;
       ++it) {
    out.push_back(it->first);
  }
  return out;
}

std::vector<FactorId> FactorGraph::factors_of(VariableId id) const {
  const auto it = adjacency_.find(id);
  if (it == adjacency_.end()) return {};
  return it->second;
}

std::uint32_t FactorGraph::next_index(VariableKind kind) const {
  return next_variable_[static_cast<int>(kind)];
}

std::uint32_t FactorGraph::next_index(FactorKind kind) const {
  return next_factor_[static_cast<int>(kind)];
}

double FactorGraph::total_cost() const {
  double cost = 0.0;
  for (const auto& [id, factor] : factors_) cost += factor_cost(factor, *this);
  return cost;
}

Eigen::VectorXd evaluate_residual(const Factor& factor, const FactorGraph& graph) {
  std::vector<VariableKind> kinds;
  std::vector<Eigen::VectorXd> values;
  std::vector<const Variable*> vars;
  for (const auto& vid : factor.variables) {
    if (!graph.contains(vid)) {
      throw InvalidInput(to_string(factor.id) + ": missing variable " + to_string(vid));
    }
    const Variable& var = graph.variable(vid);
    vars.push_back(&var);
    kinds.push_back(vid.kind);
    values.push_back(var.value);
  }
  check_frames(factor, vars);
  return linearize(factor.kind(), factor.measurement, kinds, values, false).residual;
}

double factor_cost(const Factor& factor, const FactorGraph& graph) {
  const Eigen::VectorXd r = evaluate_residual(factor, graph);
  return r.dot(factor.information * r);
}

}  // namespace planloc
