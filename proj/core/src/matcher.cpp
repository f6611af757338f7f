#include "planloc/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "planloc/errors.hpp"
#include "planloc/graph_io.hpp"

namespace planloc {
namespace {

double opposed_gap(const Plane& p, const Plane& q) {
  return std::abs(p.dist - p.normal.dot(q.closest_point()));
}

// Direction a surface faces away from the room center.
Eigen::Vector2d outward(const Plane& p, const Eigen::Vector2d& center) {
  return p.signed_distance(center) < 0.0 ? p.normal : Eigen::Vector2d(-p.normal);
}

bool coplanar(const Plane& p, const Plane& q) {
  return (p.normal - q.normal).norm() < 1e-6 && std::abs(p.dist - q.dist) < 1e-6;
}

Plane plane_of(const FactorGraph& g, VariableId id) {
  return plane_from_value(g.value(id), g.variable(id).frame);
}

double rms_center_residual(const FrameTransform& t, const std::vector<Eigen::Vector2d>& a,
                           const std::vector<Eigen::Vector2d>& s) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (t.apply(s[i]) - a[i]).squaredNorm();
  return std::sqrt(sum / static_cast<double>(a.size()));
}

FrameTransform align_centers(const std::vector<Eigen::Vector2d>& a,
                             const std::vector<Eigen::Vector2d>& s) {
  std::vector<PointPair> pairs;
  pairs.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) pairs.push_back({s[i], a[i]});
  return estimate_transform_closed_form(pairs, Frame::Map, Frame::Plan);
}

// One-to-one bookkeeping for wall-surface pairs; coplanar A-surfaces count as one.
class PlaneUnion {
 public:
  explicit PlaneUnion(const FactorGraph& a) : a_(&a) {}

  bool add(const MatchPair& pair) {
    if (auto it = s_to_a_.find(pair.s_node); it != s_to_a_.end()) {
      return it->second == pair.a_node ||
             coplanar(plane_of(*a_, it->second), plane_of(*a_, pair.a_node));
    }
    if (auto it = a_to_s_.find(pair.a_node); it != a_to_s_.end() && it->second != pair.s_node) {
      return false;
    }
    s_to_a_[pair.s_node] = pair.a_node;
    a_to_s_[pair.a_node] = pair.s_node;
    return true;
  }

  std::vector<MatchPair> pairs() const {
    std::vector<MatchPair> out;
    for (const auto& [s, a] : s_to_a_) out.push_back({a, s, MatchLevel::WallSurface});
    return out;
  }

 private:
  const FactorGraph* a_;
  std::map<VariableId, VariableId> s_to_a_;
  std::map<VariableId, VariableId> a_to_s_;
};

bool pairs_before(const std::vector<MatchPair>& x, const std::vector<MatchPair>& y) {
  return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end(),
                                      [](const MatchPair& p, const MatchPair& q) {
                                        return std::tie(p.s_node, p.a_node) <
                                               std::tie(q.s_node, q.a_node);
                                      });
}

nlohmann::json candidate_to_json(const MatchCandidate& c) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : c.pairs) {
    pairs.push_back({{"a", to_string(p.a_node)},
                     {"s", to_string(p.s_node)},
                     {"level", std::string(to_string(p.level))}});
  }
  const Pose2& t = c.transform_hint.pose;
  return {{"affinity", c.affinity},
          {"transform_hint", {{"x", t.x}, {"y", t.y}, {"theta", t.theta}}},
          {"pairs", std::move(pairs)}};
}

MatchCandidate candidate_from_json(const nlohmann::json& j, const std::string& path) {
  try {
    MatchCandidate c;
    c.affinity = j.at("affinity").get<double>();
    const auto& t = j.at("transform_hint");
    c.transform_hint.pose =
        Pose2(t.at("x").get<double>(), t.at("y").get<double>(), t.at("theta").get<double>());
    for (const auto& p : j.at("pairs")) {
      const auto level = p.at("level").get<std::string>();
      MatchPair pair;
      pair.a_node = parse_variable_id(p.at("a").get<std::string>());
      pair.s_node = parse_variable_id(p.at("s").get<std::string>());
      if (level == "Room") {
        pair.level = MatchLevel::Room;
      } else if (level == "WallSurface") {
        pair.level = MatchLevel::WallSurface;
      } else {
        throw ParseError(path + ".pairs: unknown level '" + level + "'");
      }
      c.pairs.push_back(pair);
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace

std::string_view to_string(MatchLevel level) {
  return level == MatchLevel::Room ? "Room" : "WallSurface";
}

std::string_view to_string(MatchStatus status) {
  switch (status) {
    case MatchStatus::Matched:
      return "Matched";
    case MatchStatus::Ambiguous:
      return "Ambiguous";
    case MatchStatus::NoMatch:
      return "NoMatch";
  }
  return "NoMatch";
}

MatchStatus match_status_from_string(std::string_view text) {
  if (text == "Matched") return MatchStatus::Matched;
  if (text == "Ambiguous") return MatchStatus::Ambiguous;
  if (text == "NoMatch") return MatchStatus::NoMatch;
  throw ParseError("unknown match status '" + std::string(text) + "'");
}

std::vector<MatchPair> MatchCandidate::room_pairs() const {
  std::vector<MatchPair> out;
  for (const auto& p : pairs) {
    if (p.level == MatchLevel::Room) out.push_back(p);
  }
  return out;
}

std::vector<MatchPair> MatchCandidate::plane_pairs() const {
  std::vector<MatchPair> out;
  for (const auto& p : pairs) {
    if (p.level == MatchLevel::WallSurface) out.push_back(p);
  }
  return out;
}

RoomView room_view(const FactorGraph& graph, VariableId room) {
  if (!graph.contains(room)) throw StructuralError("room " + to_string(room) + " not in graph");
  for (FactorId fid : graph.factors_of(room)) {
    if (fid.kind != FactorKind::RoomToWalls) continue;
    const Factor& f = graph.factor(fid);
    if (f.variables.size() != 5 || f.variables[0] != room) continue;
    RoomView view;
    view.room = room;
    view.center = graph.value(room).head<2>();
    for (int k = 0; k < 4; ++k) {
      const VariableId p = f.variables[k + 1];
      if (!graph.contains(p) || p.kind != VariableKind::PlaneVar) {
        throw StructuralError("room " + to_string(room) + " lacks four connected planes");
      }
      view.planes[k] = p;
      view.surfaces[k] = plane_of(graph, p);
    }
    view.dims = {opposed_gap(view.surfaces[0], view.surfaces[1]),
                 opposed_gap(view.surfaces[2], view.surfaces[3])};
    return view;
  }
  throw StructuralError("room " + to_string(room) + " lacks four connected planes");
}

std::vector<RoomView> room_views(const FactorGraph& graph) {
  std::vector<RoomView> out;
  for (FactorId fid : graph.factors_of(FactorKind::RoomToWalls)) {
    const VariableId room = graph.factor(fid).variables.front();
    if (!out.empty() && out.back().room == room) continue;
    out.push_back(room_view(graph, room));
  }
  std::sort(out.begin(), out.end(),
            [](const RoomView& x, const RoomView& y) { return x.room < y.room; });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const RoomView& x, const RoomView& y) { return x.room == y.room; }),
            out.end());
  return out;
}

bool dimensions_agree(const Eigen::Vector2d& a, const Eigen::Vector2d& s, double gate) {
  const bool straight = std::abs(a.x() - s.x()) <= gate && std::abs(a.y() - s.y()) <= gate;
  const bool swapped = std::abs(a.x() - s.y()) <= gate && std::abs(a.y() - s.x()) <= gate;
  return straight || swapped;
}

double room_affinity(const std::vector<Eigen::Vector2d>& a_centers,
                     const std::vector<Eigen::Vector2d>& s_centers, const MatcherConfig& config) {
  const FrameTransform t = align_centers(a_centers, s_centers);
  return std::exp(-rms_center_residual(t, a_centers, s_centers) / config.room_scale);
}

std::vector<MatchCandidate> propose_room_pairs(const FactorGraph& a, const FactorGraph& s,
                                               const MatcherConfig& config) {
  const auto a_rooms = room_views(a);
  const auto s_rooms = room_views(s);
  const std::size_t n = s_rooms.size();
  if (n < 2 || a_rooms.size() < n) return {};

  std::vector<std::vector<std::size_t>> feasible(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < a_rooms.size(); ++k) {
      if (dimensions_agree(a_rooms[k].dims, s_rooms[i].dims, config.dimension_gate)) {
        feasible[i].push_back(k);
      }
    }
  }

  auto consistent = [&](const std::vector<std::size_t>& assign, std::size_t k) {
    const std::size_t i = assign.size();
    for (std::size_t j = 0; j < i; ++j) {
      if (assign[j] == k) return false;
      const double da = (a_rooms[k].center - a_rooms[assign[j]].center).norm();
      const double ds = (s_rooms[i].center - s_rooms[j].center).norm();
      if (std::abs(da - ds) > config.distance_gate) return false;
    }
    return true;
  };

  auto centers = [&](const std::vector<std::size_t>& assign) {
    std::pair<std::vector<Eigen::Vector2d>, std::vector<Eigen::Vector2d>> out;
    for (std::size_t i = 0; i < assign.size(); ++i) {
      out.first.push_back(a_rooms[assign[i]].center);
      out.second.push_back(s_rooms[i].center);
    }
    return out;
  };

  std::vector<std::vector<std::size_t>> complete;
  if (static_cast<int>(n) <= config.exhaustive_limit) {
    std::vector<std::size_t> assign;
    auto recurse = [&](auto&& self) -> void {
      if (assign.size() == n) {
        complete.push_back(assign);
        return;
      }
      for (std::size_t k : feasible[assign.size()]) {
        if (!consistent(assign, k)) continue;
        assign.push_back(k);
        self(self);
        assign.pop_back();
      }
    };
    recurse(recurse);
  } else {
    std::vector<std::vector<std::size_t>> beam{{}};
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::pair<double, std::vector<std::size_t>>> next;
      for (const auto& partial : beam) {
        for (std::size_t k : feasible[i]) {
          if (!consistent(partial, k)) continue;
          auto grown = partial;
          grown.push_back(k);
          double err = 0.0;
          if (grown.size() >= 2) {
            const auto [ac, sc] = centers(grown);
            err = rms_center_residual(align_centers(ac, sc), ac, sc);
          }
          next.emplace_back(err, std::move(grown));
        }
      }
      std::sort(next.begin(), next.end());
      if (static_cast<int>(next.size()) > config.beam_width) next.resize(config.beam_width);
      beam.clear();
      for (auto& [err, partial] : next) beam.push_back(std::move(partial));
      if (beam.empty()) break;
    }
    for (auto& assign : beam) {
      if (assign.size() == n) complete.push_back(std::move(assign));
    }
  }

  std::vector<MatchCandidate> out;
  for (const auto& assign : complete) {
    const auto [ac, sc] = centers(assign);
    FrameTransform hint;
    try {
      hint = align_centers(ac, sc);
    } catch (const DegenerateInput&) {
      continue;
    }
    const double affinity = std::exp(-rms_center_residual(hint, ac, sc) / config.room_scale);
    if (affinity < config.room_affinity_min) continue;
    MatchCandidate c;
    for (std::size_t i = 0; i < n; ++i) {
      c.pairs.push_back({a_rooms[assign[i]].room, s_rooms[i].room, MatchLevel::Room});
    }
    c.affinity = affinity;
    c.transform_hint = hint;
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), candidate_before);
  return out;
}

std::vector<MatchPair> propose_wall_pairs(const MatchPair& room_pair, const FactorGraph& a,
                                          const FactorGraph& s, double heading,
                                          const MatcherConfig& config) {
  if (room_pair.level != MatchLevel::Room) {
    throw InvalidInput("propose_wall_pairs: expected a room-level pair");
  }
  const RoomView ra = room_view(a, room_pair.a_node);
  const RoomView rs = room_view(s, room_pair.s_node);
  const Eigen::Matrix2d rot = rotation(heading);

  std::vector<MatchPair> out;
  std::array<bool, 4> used{};
  for (int k = 0; k < 4; ++k) {
    const Eigen::Vector2d dir = rot * outward(rs.surfaces[k], rs.center);
    int best = -1;
    double best_dot = config.wall_direction_min;
    for (int m = 0; m < 4; ++m) {
      const double dot = dir.dot(outward(ra.surfaces[m], ra.center));
      if (dot > best_dot) {
        best_dot = dot;
        best = m;
      }
    }
    if (best < 0 || used[best]) return {};
    used[best] = true;
    out.push_back({ra.planes[best], rs.planes[k], MatchLevel::WallSurface});
  }
  return out;
}

std::vector<MatchCandidate> combine_bottom_up(const std::vector<MatchCandidate>& room_candidates,
                                              const FactorGraph& a, const FactorGraph& s,
                                              const MatcherConfig& config) {
  std::vector<MatchCandidate> out;
  for (const auto& candidate : room_candidates) {
    const double heading = candidate.transform_hint.pose.theta;
    PlaneUnion planes(a);
    bool ok = true;
    for (const auto& room : candidate.room_pairs()) {
      const auto walls = propose_wall_pairs(room, a, s, heading, config);
      if (walls.empty()) {
        ok = false;
        break;
      }
      for (const auto& w : walls) ok = ok && planes.add(w);
      if (!ok) break;
    }
    if (!ok) continue;
    MatchCandidate combined;
    combined.pairs = candidate.room_pairs();
    for (const auto& p : planes.pairs()) combined.pairs.push_back(p);
    combined.affinity = candidate.affinity;
    combined.transform_hint = candidate.transform_hint;
    out.push_back(std::move(combined));
  }
  return out;
}

CandidateScore score_candidate(const MatchCandidate& candidate, const FactorGraph& a,
                               const FactorGraph& s, const MatcherConfig& config) {
  std::vector<Eigen::Vector2d> ac;
  std::vector<Eigen::Vector2d> sc;
  for (const auto& p : candidate.room_pairs()) {
    ac.push_back(a.value(p.a_node).head<2>());
    sc.push_back(s.value(p.s_node).head<2>());
  }
  if (ac.size() < 2) throw DegenerateInput("score_candidate: needs at least 2 room pairs");
  CandidateScore score;
  score.transform_hint = align_centers(ac, sc);
  const double e_rho = rms_center_residual(score.transform_hint, ac, sc);

  double sum = 0.0;
  const auto planes = candidate.plane_pairs();
  for (const auto& p : planes) {
    Plane ps = plane_of(s, p.s_node);
    ps.frame = Frame::Map;
    const Plane mapped = transform_plane(score.transform_hint, ps);
    const Plane pa = plane_of(a, p.a_node);
    double dphi = wrap_angle(mapped.azimuth() - pa.azimuth());
    double dd = mapped.dist - pa.dist;
    if (mapped.normal.dot(pa.normal) < 0.0) {
      dphi = wrap_angle(dphi + std::numbers::pi);
      dd = -mapped.dist - pa.dist;
    }
    sum += dphi * dphi + dd * dd;
  }
  const double e_pi = planes.empty() ? 0.0 : std::sqrt(sum / static_cast<double>(planes.size()));
  score.affinity = std::exp(-(e_rho / config.room_scale + e_pi / config.plane_scale));
  return score;
}

bool candidate_before(const MatchCandidate& x, const MatchCandidate& y) {
  if (x.affinity != y.affinity) return x.affinity > y.affinity;
  return pairs_before(x.pairs, y.pairs);
}

MatchResult cluster_and_decide(std::vector<MatchCandidate> scored, const MatcherConfig& config) {
  MatchResult result;
  if (scored.empty()) {
    result.reason = "no consistent candidate";
    return result;
  }
  std::sort(scored.begin(), scored.end(), candidate_before);
  const double top = scored.front().affinity;
  result.best = scored.front();
  if (top < config.accept) {
    result.reason = "best affinity below acceptance threshold";
    return result;
  }
  for (auto& c : scored) {
    if (c.affinity < (1.0 - config.cluster_width) * top) break;
    result.cluster.push_back(std::move(c));
  }
  if (result.cluster.size() == 1) {
    result.status = MatchStatus::Matched;
  } else {
    result.status = MatchStatus::Ambiguous;
    result.reason = std::to_string(result.cluster.size()) + " candidates in the best cluster";
  }
  return result;
}

MatchResult match(const FactorGraph& a, const FactorGraph& s, const MatcherConfig& config) {
  if (room_views(s).size() < 2) {
    MatchResult result;
    result.reason = "fewer than 2 rooms observed";
    return result;
  }
  auto combined = combine_bottom_up(propose_room_pairs(a, s, config), a, s, config);
  std::vector<MatchCandidate> scored;
  for (auto& c : combined) {
    try {
      const auto score = score_candidate(c, a, s, config);
      c.affinity = score.affinity;
      c.transform_hint = score.transform_hint;
      scored.push_back(std::move(c));
    } catch (const DegenerateInput&) {
    }
  }
  return cluster_and_decide(std::move(scored), config);
}

MatchResult match(const AGraph& a, const SGraph& s, const MatcherConfig& config) {
  return match(a.graph, s.graph(), config);
}

MatchCandidate extend_match(const MatchCandidate& established, const FactorGraph& a,
                            const FactorGraph& s, const MatcherConfig& config) {
  const FrameTransform& t = established.transform_hint;
  const double heading = t.pose.theta;
  std::vector<MatchPair> rooms = established.room_pairs();
  std::set<VariableId> a_used;
  std::set<VariableId> s_used;
  for (const auto& p : rooms) {
    a_used.insert(p.a_node);
    s_used.insert(p.s_node);
  }
  PlaneUnion planes(a);
  for (const auto& p : established.plane_pairs()) planes.add(p);

  const auto a_rooms = room_views(a);
  for (const auto& rs : room_views(s)) {
    if (s_used.contains(rs.room)) continue;
    const Eigen::Vector2d c = t.apply(rs.center);
    const RoomView* best = nullptr;
    double best_dist = 0.0;
    for (const auto& ra : a_rooms) {
      if (a_used.contains(ra.room)) continue;
      if (!dimensions_agree(ra.dims, rs.dims, config.dimension_gate)) continue;
      const double dist = (ra.center - c).norm();
      if (dist <= config.distance_gate && (!best || dist < best_dist)) {
        best_dist = dist;
        best = &ra;
      }
    }
    if (!best) continue;
    const MatchPair room{best->room, rs.room, MatchLevel::Room};
    const auto walls = propose_wall_pairs(room, a, s, heading, config);
    if (walls.empty()) continue;
    PlaneUnion trial = planes;
    bool ok = true;
    for (const auto& w : walls) ok = ok && trial.add(w);
    if (!ok) continue;
    planes = trial;
    rooms.push_back(room);
    a_used.insert(best->room);
    s_used.insert(rs.room);
  }

  std::sort(rooms.begin(), rooms.end(),
            [](const MatchPair& x, const MatchPair& y) { return x.s_node < y.s_node; });
  MatchCandidate out;
  out.pairs = rooms;
  for (const auto& p : planes.pairs()) out.pairs.push_back(p);
  const auto score = score_candidate(out, a, s, config);
  out.affinity = score.affinity;
  out.transform_hint = score.transform_hint;
  return out;
}

nlohmann::json match_result_to_json(const MatchResult& result) {
  nlohmann::json cluster = nlohmann::json::array();
  for (const auto& c : result.cluster) cluster.push_back(candidate_to_json(c));
  return {{"status", std::string(to_string(result.status))},
          {"reason", result.reason},
          {"best", result.best ? candidate_to_json(*result.best) : nlohmann::json(nullptr)},
          {"cluster", std::move(cluster)}};
}

MatchResult match_result_from_json(const nlohmann::json& doc) {
  MatchResult result;
  try {
    result.status = match_status_from_string(doc.at("status").get<std::string>());
    result.reason = doc.value("reason", "");
    if (doc.contains("best") && !doc.at("best").is_null()) {
      result.best = candidate_from_json(doc.at("best"), "$.best");
    }
    const auto& cluster = doc.at("cluster");
    for (std::size_t i = 0; i < cluster.size(); ++i) {
      result.cluster.push_back(candidate_from_json(cluster[i], "$.cluster[" + std::to_string(i) + "]"));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("match result: ") + e.what());
  }
  return result;
}

}  // namespace planloc
