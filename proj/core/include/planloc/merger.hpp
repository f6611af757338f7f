#pragma once

#include <map>
#include <vector>

#include "planloc/a_graph.hpp"
#include "planloc/matcher.hpp"
#include "planloc/s_graph.hpp"
#include "planloc/solver.hpp"

namespace planloc {

struct MergeConfig {
  InformationDefaults information;
  SolverConfig solver;
  /// Keep the plan authoritative. When false, A-graph variables stay free and the
  /// A-graph's own prior is what anchors them.
  bool fix_a_graph = true;
};

/// The informed graph: both inputs re-indexed into one graph plus the map->plan transform.
struct MergedState {
  FactorGraph graph;
  VariableId transform;
  /// Original id -> id in `graph`.
  std::map<VariableId, VariableId> a_ids;
  std::map<VariableId, VariableId> s_ids;
  /// Keyframes of the S-graph in index order, as ids in `graph`.
  std::vector<VariableId> keyframes;
  std::vector<FactorId> merge_factors;
  MatchCandidate match;
  SolveReport report;

  FrameTransform map_to_plan() const;
};

/// Unions both graphs, adds a RoomToRoom factor per room pair and a PlaneToPlane factor per
/// wall-surface pair (both through the transform variable), seeds the transform from the
/// candidate's hint and optimises. Throws MergeRefused unless `match` is Matched.
MergedState merge(const FactorGraph& a, const FactorGraph& s, const MatchResult& match,
                  const MergeConfig& config = {});
MergedState merge(const AGraph& a, const SGraph& s, const MatchResult& match,
                  const MergeConfig& config = {});

/// Same, for a candidate already accepted (e.g. one grown by extend_match).
MergedState merge_candidate(const FactorGraph& a, const FactorGraph& s,
                            const MatchCandidate& candidate, const MergeConfig& config = {});

/// ^B x_M ∘ ^M x_R for every keyframe, in keyframe order.
std::vector<Pose2> localized_trajectory(const MergedState& merged);

/// Sum of rᵀΛr over the merge factors.
double merge_factor_cost(const MergedState& merged);

}  // namespace planloc
