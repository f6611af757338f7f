#pragma once

#include <array>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "planloc/a_graph.hpp"
#include "planloc/factor_graph.hpp"
#include "planloc/s_graph.hpp"

namespace planloc {

struct MatcherConfig {
  double dimension_gate = 0.3;      // metres per axis
  double distance_gate = 0.5;       // pairwise room-distance consistency, metres
  double room_affinity_min = 0.5;
  double room_scale = 0.25;         // metres
  double plane_scale = 0.1;
  double accept = 0.6;
  double cluster_width = 0.1;       // relative to the top score
  int exhaustive_limit = 8;         // S-rooms searched exhaustively
  int beam_width = 50;
  double wall_direction_min = 0.707;
};

enum class MatchLevel { Room, WallSurface };
enum class MatchStatus { Matched, Ambiguous, NoMatch };

std::string_view to_string(MatchLevel level);
std::string_view to_string(MatchStatus status);
MatchStatus match_status_from_string(std::string_view text);

struct MatchPair {
  VariableId a_node;
  VariableId s_node;
  MatchLevel level = MatchLevel::Room;

  auto operator<=>(const MatchPair&) const = default;
};

struct MatchCandidate {
  /// Room pairs then wall-surface pairs, each block ordered by s_node.
  std::vector<MatchPair> pairs;
  double affinity = 0.0;
  FrameTransform transform_hint = FrameTransform::identity();

  std::vector<MatchPair> room_pairs() const;
  std::vector<MatchPair> plane_pairs() const;
};

struct MatchResult {
  MatchStatus status = MatchStatus::NoMatch;
  std::optional<MatchCandidate> best;
  std::vector<MatchCandidate> cluster;
  std::string reason;
};

/// A four-wall room as seen by the matcher: center, (+x, -x, +y, -y) planes and the
/// distance between each opposed pair.
struct RoomView {
  VariableId room;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  std::array<VariableId, 4> planes{};
  std::array<Plane, 4> surfaces{};
  Eigen::Vector2d dims = Eigen::Vector2d::Zero();
};

/// Rooms that carry a RoomToWalls factor, ordered by variable id.
std::vector<RoomView> room_views(const FactorGraph& graph);
/// Throws StructuralError when `room` has no RoomToWalls factor with four planes.
RoomView room_view(const FactorGraph& graph, VariableId room);

/// Dimension gate, insensitive to which pair is labelled x: (w, h) against (W, H) or (H, W).
bool dimensions_agree(const Eigen::Vector2d& a, const Eigen::Vector2d& s, double gate);

/// exp(-e/room_scale) with e the RMS center residual after rigid alignment of the S-room
/// centers onto the A-room centers. Throws DegenerateInput for < 2 pairs.
double room_affinity(const std::vector<Eigen::Vector2d>& a_centers,
                     const std::vector<Eigen::Vector2d>& s_centers, const MatcherConfig& config);

/// Injective assignments of every S-room to an A-room passing the dimension, pairwise
/// distance and room-affinity gates, best first. Empty when s has < 2 rooms.
std::vector<MatchCandidate> propose_room_pairs(const FactorGraph& a, const FactorGraph& s,
                                               const MatcherConfig& config = {});

/// Pairs the four surfaces of a matched room by the direction each faces away from the
/// room center, after rotating S directions by `heading`. Empty when no one-to-one
/// pairing exists. Throws StructuralError for a room without four planes.
std::vector<MatchPair> propose_wall_pairs(const MatchPair& room_pair, const FactorGraph& a,
                                          const FactorGraph& s, double heading,
                                          const MatcherConfig& config = {});

/// Adds every room's wall pairs to its candidate and drops candidates whose wall-pair
/// union is not one-to-one. Coplanar A-surfaces count as one.
std::vector<MatchCandidate> combine_bottom_up(const std::vector<MatchCandidate>& room_candidates,
                                              const FactorGraph& a, const FactorGraph& s,
                                              const MatcherConfig& config = {});

struct CandidateScore {
  double affinity = 0.0;
  FrameTransform transform_hint;
};

/// Rigid hint from matched room centers and exp(-(e_rho/room_scale + e_pi/plane_scale)).
/// Throws DegenerateInput for < 2 room pairs.
CandidateScore score_candidate(const MatchCandidate& candidate, const FactorGraph& a,
                               const FactorGraph& s, const MatcherConfig& config = {});

/// Sorts by affinity and splits off the best cluster (scores >= (1 - width) * top).
MatchResult cluster_and_decide(std::vector<MatchCandidate> scored,
                               const MatcherConfig& config = {});

/// propose -> expand -> combine -> score -> cluster. Deterministic.
MatchResult match(const FactorGraph& a, const FactorGraph& s, const MatcherConfig& config = {});
MatchResult match(const AGraph& a, const SGraph& s, const MatcherConfig& config = {});

/// Adds pairs for S-rooms the candidate leaves out whose center lands within
/// distance_gate of a free, dimension-compatible A-room under the candidate's hint,
/// then rescores.
MatchCandidate extend_match(const MatchCandidate& established, const FactorGraph& a,
                            const FactorGraph& s, const MatcherConfig& config = {});

/// Candidate order: affinity descending, then pair lists lexicographically.
bool candidate_before(const MatchCandidate& x, const MatchCandidate& y);

nlohmann::json match_result_to_json(const MatchResult& result);
MatchResult match_result_from_json(const nlohmann::json& doc);

}  // namespace planloc
