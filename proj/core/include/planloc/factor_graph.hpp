#pragma once

#include <Eigen/Core>
#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "planloc/geometry.hpp"

namespace planloc {

enum class VariableKind : std::uint8_t {
  Keyframe,     // (x, y, theta)
  PlaneVar,     // (phi, d)
  Wall,         // (x, y)
  Room,         // four-wall room center (x, y)
  TwoWallRoom,  // two-wall room center (x, y)
  Doorway,      // (x, y)
  Floor,        // (x, y)
  Transform,    // map -> plan rigid transform (x, y, theta)
};
inline constexpr std::size_t kVariableKindCount = 8;

enum class FactorKind : std::uint8_t {
  Odometry,        // keyframe, keyframe
  PosePlane,       // keyframe, plane
  RoomToWalls,     // room, +x, -x, +y, -y planes
  WallCenter,      // wall (or two-wall room), plane, plane
  DoorwayToRooms,  // doorway, room, room
  RoomToRoom,      // plan room, map room [, transform]
  PlaneToPlane,    // plan plane, map plane [, transform]
  Prior,           // any single variable
  FloorToRoom,     // floor, room
};
inline constexpr std::size_t kFactorKindCount = 9;

int dimension(VariableKind kind);
std::string_view to_string(VariableKind kind);
std::string_view to_string(FactorKind kind);
VariableKind variable_kind_from_string(std::string_view text);
FactorKind factor_kind_from_string(std::string_view text);

struct VariableId {
  VariableKind kind = VariableKind::Keyframe;
  std::uint32_t index = 0;
  auto operator<=>(const VariableId&) const = default;
};

struct FactorId {
  FactorKind kind = FactorKind::Prior;
  std::uint32_t index = 0;
  auto operator<=>(const FactorId&) const = default;
};

/// "Keyframe:3" style identifiers used by the JSON formats.
std::string to_string(VariableId id);
std::string to_string(FactorId id);
VariableId parse_variable_id(std::string_view text);
FactorId parse_factor_id(std::string_view text);

struct Variable {
  VariableId id;
  Eigen::VectorXd value;
  Frame frame = Frame::Map;
  bool fixed = false;
};

struct Factor {
  FactorId id;
  std::vector<VariableId> variables;
  Eigen::VectorXd measurement;
  Eigen::MatrixXd information;

  FactorKind kind() const { return id.kind; }
};

/// Diagonal information defaults for each factor family.
struct InformationDefaults {
  Eigen::Vector3d odometry{100.0, 100.0, 400.0};
  Eigen::Vector2d pose_plane{400.0, 2500.0};
  Eigen::Vector2d structure{25.0, 25.0};  // room, wall and doorway factors
  Eigen::Vector2d merge{100.0, 100.0};    // room-to-room and plane-to-plane
  Eigen::Vector2d floor{1.0, 1.0};
  double prior = 1e6;
};

/// Typed variables plus residual factors. Indices are allocated per kind, start at 0 and
/// are never reused, so ids stay stable across removals.
class FactorGraph {
 public:
  VariableId add_variable(VariableKind kind, const Eigen::VectorXd& value,
                          Frame frame = Frame::Map, bool fixed = false);
  /// Re-inserts a variable under an explicit id (used by deserialisation).
  void insert_variable(const Variable& variable);

  FactorId add_factor(FactorKind kind, std::vector<VariableId> variables,
                      Eigen::VectorXd measurement, Eigen::MatrixXd information);
  void insert_factor(const Factor& factor);

  void remove_factor(FactorId id);
  /// Removes a variable together with every factor attached to it.
  void remove_variable(VariableId id);

  bool contains(VariableId id) const { return variables_.contains(id); }
  bool contains(FactorId id) const { return factors_.contains(id); }

  const Variable& variable(VariableId id) const;
  const Factor& factor(FactorId id) const;
  const Eigen::VectorXd& value(VariableId id) const { return variable(id).value; }
  void set_value(VariableId id, const Eigen::VectorXd& value);
  void set_fixed(VariableId id, bool fixed);

  const std::map<VariableId, Variable>& variables() const { return variables_; }
  const std::map<FactorId, Factor>& factors() const { return factors_; }

  std::vector<VariableId> variables_of(VariableKind kind) const;
  std::vector<FactorId> factors_of(FactorKind kind) const;
  /// Factors touching `id`, ordered by FactorId.
  std::vector<FactorId> factors_of(VariableId id) const;

  std::size_t num_variables() const { return variables_.size(); }
  std::size_t num_factors() const { return factors_.size(); }

  std::uint32_t next_index(VariableKind kind) const;
  std::uint32_t next_index(FactorKind kind) const;

  /// Σ rᵀΛr over every factor.
  double total_cost() const;

 private:
  void validate_factor(const Factor& factor) const;
  void attach(const Factor& factor);

  std::map<VariableId, Variable> variables_;
  std::map<FactorId, Factor> factors_;
  std::map<VariableId, std::vector<FactorId>> adjacency_;
  std::array<std::uint32_t, kVariableKindCount> next_variable_{};
  std::array<std::uint32_t, kFactorKindCount> next_factor_{};
};

/// Residual of one factor at the graph's current values. Throws InvalidInput on a
/// missing variable or on planes/rooms whose frames do not fit the factor.
Eigen::VectorXd evaluate_residual(const Factor& factor, const FactorGraph& graph);

/// rᵀΛr for one factor.
double factor_cost(const Factor& factor, const FactorGraph& graph);

}  // namespace planloc
