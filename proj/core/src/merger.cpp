#include "planloc/merger.hpp"

#include "planloc/errors.hpp"

namespace planloc {
namespace {

void copy_into(const FactorGraph& source, FactorGraph& target,
               std::map<VariableId, VariableId>& ids, bool fix) {
  for (const auto& [id, var] : source.variables()) {
    ids[id] = target.add_variable(id.kind, var.value, var.frame, var.fixed || fix);
  }
  for (const auto& [fid, factor] : source.factors()) {
    std::vector<VariableId> vars;
    vars.reserve(factor.variables.size());
    for (const auto& v : factor.variables) vars.push_back(ids.at(v));
    target.add_factor(fid.kind, std::move(vars), factor.measurement, factor.information);
  }
}

}  // namespace

FrameTransform MergedState::map_to_plan() const {
  return {Pose2::from_vector(graph.value(transform).head<3>()), Frame::Map, Frame::Plan};
}

MergedState merge_candidate(const FactorGraph& a, const FactorGraph& s,
                            const MatchCandidate& candidate, const MergeConfig& config) {
  if (candidate.room_pairs().empty()) throw MergeRefused("merge: candidate has no room pairs");
  MergedState out;
  out.match = candidate;
  copy_into(a, out.graph, out.a_ids, config.fix_a_graph);
  copy_into(s, out.graph, out.s_ids, false);
  for (VariableId kf : s.variables_of(VariableKind::Keyframe)) out.keyframes.push_back(out.s_ids.at(kf));

  out.transform = out.graph.add_variable(VariableKind::Transform, Pose2::identity().vector());
  const Eigen::MatrixXd info = config.information.merge.asDiagonal();
  for (const auto& p : candidate.pairs) {
    const FactorKind kind =
        p.level == MatchLevel::Room ? FactorKind::RoomToRoom : FactorKind::PlaneToPlane;
    out.merge_factors.push_back(out.graph.add_factor(
        kind, {out.a_ids.at(p.a_node), out.s_ids.at(p.s_node), out.transform}, Eigen::VectorXd(0),
        info));
  }
  out.graph.set_value(out.transform, candidate.transform_hint.pose.vector());
  out.report = optimize(out.graph, config.solver);
  return out;
}

MergedState merge(const FactorGraph& a, const FactorGraph& s, const MatchResult& match,
                  const MergeConfig& config) {
  if (match.status != MatchStatus::Matched || !match.best) {
    throw MergeRefused("merge refused: match status is " + std::string(to_string(match.status)) +
                       (match.reason.empty() ? "" : " (" + match.reason + ")"));
  }
  return merge_candidate(a, s, *match.best, config);
}

MergedState merge(const AGraph& a, const SGraph& s, const MatchResult& match,
                  const MergeConfig& config) {
  return merge(a.graph, s.graph(), match, config);
}

std::vector<Pose2> localized_trajectory(const MergedState& merged) {
  const Pose2 t = merged.map_to_plan().pose;
  std::vector<Pose2> out;
  out.reserve(merged.keyframes.size());
  for (VariableId kf : merged.keyframes) {
    out.push_back(t * Pose2::from_vector(merged.graph.value(kf).head<3>()));
  }
  return out;
}

double merge_factor_cost(const MergedState& merged) {
  double sum = 0.0;
  for (FactorId f : merged.merge_factors) sum += factor_cost(merged.graph.factor(f), merged.graph);
  return sum;
}

}  // namespace planloc
