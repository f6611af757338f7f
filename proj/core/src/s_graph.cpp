#include "planloc/s_graph.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "planloc/a_graph.hpp"
#include "planloc/errors.hpp"
#include "planloc/factors.hpp"

namespace planloc {
namespace {

constexpr double kInteriorMargin = 0.3;
constexpr double kMinSideOverlap = 1.0;
// Short walls with a doorway in them may show well under half their length.
constexpr double kMinSideFraction = 0.3;

Eigen::Vector2d tangent(const Eigen::Vector2d& n) { return {-n.y(), n.x()}; }

Pose2 pose_of(const FactorGraph& g, VariableId id) {
  return Pose2::from_vector(g.value(id).head<3>());
}

// Angle between two lines, ignoring normal sign.
double line_angle(const Eigen::Vector2d& n1, const Eigen::Vector2d& n2) {
  return std::acos(std::min(1.0, std::abs(n1.dot(n2))));
}

double aligned_distance_gap(const Plane& a, const Plane& b) {
  return a.normal.dot(b.normal) >= 0.0 ? std::abs(a.dist - b.dist) : std::abs(a.dist + b.dist);
}

double total_overlap(const std::vector<Interval>& intervals, double lo, double hi) {
  double sum = 0.0;
  for (const auto& [a, b] : intervals) sum += std::max(0.0, std::min(b, hi) - std::max(a, lo));
  return sum;
}

// Liang-Barsky test of segment p0-p1 against the box |u| <= hu, |v| <= hv in a local frame.
bool segment_hits_box(Eigen::Vector2d p0, Eigen::Vector2d p1, double hu, double hv) {
  if (hu <= 0.0 || hv <= 0.0) return false;
  const Eigen::Vector2d d = p1 - p0;
  double t0 = 0.0;
  double t1 = 1.0;
  const double p[4] = {-d.x(), d.x(), -d.y(), d.y()};
  const double q[4] = {p0.x() + hu, hu - p0.x(), p0.y() + hv, hv - p0.y()};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
    if (t0 > t1) return false;
  }
  return true;
}

Eigen::Vector2d intersect_lines(const Plane& a, const Plane& b) {
  Eigen::Matrix2d m;
  m.row(0) = a.normal.transpose();
  m.row(1) = b.normal.transpose();
  return m.inverse() * Eigen::Vector2d(a.dist, b.dist);
}

struct PlaneInfo {
  VariableId id;
  Plane plane;
  Eigen::Vector2d facing;
  std::vector<Interval> extent;
  std::vector<Segment> segments;
};

struct OpposedPair {
  std::size_t a = 0;
  std::size_t b = 0;
  double gap = 0.0;
};

bool same_pair(VariableId a, VariableId b, VariableId c, VariableId d) {
  return (a == c && b == d) || (a == d && b == c);
}

}  // namespace

SGraph::SGraph(SGraphConfig config) : config_(std::move(config)) { config_.solver.validate(); }

VariableId SGraph::add_keyframe(const Pose2& initial, const std::optional<Pose2>& odometry) {
  if (keyframes_.empty()) {
    const VariableId kf = graph_.add_variable(VariableKind::Keyframe, initial.vector());
    graph_.add_factor(FactorKind::Prior, {kf}, initial.vector(),
                      config_.information.prior * Eigen::Matrix3d::Identity());
    keyframes_.push_back(kf);
    return kf;
  }
  if (!odometry) throw InvalidInput("SGraph: keyframe after the first needs odometry");
  const VariableId prev = keyframes_.back();
  const Pose2 guess = pose_of(graph_, prev) * *odometry;
  const VariableId kf = graph_.add_variable(VariableKind::Keyframe, guess.vector());
  graph_.add_factor(FactorKind::Odometry, {prev, kf}, odometry->vector(),
                    config_.information.odometry.asDiagonal());
  keyframes_.push_back(kf);
  return kf;
}

Plane SGraph::plane(VariableId id) const { return plane_from_value(graph_.value(id), Frame::Map); }

Eigen::Vector2d SGraph::facing(VariableId id) const {
  const Eigen::Vector2d n = plane(id).normal;
  return n.dot(planes_.at(id).facing) >= 0.0 ? n : Eigen::Vector2d(-n);
}

std::vector<Association> SGraph::associate_planes(
    VariableId keyframe, const std::vector<PlaneObservation>& observations) {
  const Pose2 pose = pose_of(graph_, keyframe);
  const Eigen::Matrix2d rot = pose.rotation();
  std::vector<Association> out;
  out.reserve(observations.size());

  for (std::size_t i = 0; i < observations.size(); ++i) {
    const auto& obs = observations[i];
    const Eigen::Vector2d n = rot * obs.plane.normal;
    const Plane in_map =
        normalize_away_from_origin(n, obs.plane.dist + n.dot(pose.translation()), Frame::Map);
    const Eigen::Vector2d obs_facing = (rot * obs.facing).normalized();

    std::optional<VariableId> best;
    double best_gap = std::numeric_limits<double>::infinity();
    for (const auto& [id, record] : planes_) {
      if (facing(id).dot(obs_facing) <= 0.0) continue;
      const Plane p = plane(id);
      if (line_angle(p.normal, in_map.normal) >= config_.assoc_max_dphi) continue;
      const double gap = aligned_distance_gap(p, in_map);
      if (gap >= config_.assoc_max_dd) continue;
      if (gap < best_gap) {
        best_gap = gap;
        best = id;
      }
    }

    Association assoc;
    assoc.observation = i;
    if (best) {
      assoc.plane = *best;
    } else {
      assoc.plane = graph_.add_variable(VariableKind::PlaneVar, plane_value(in_map));
      PlaneRecord record;
      record.id = assoc.plane;
      record.facing = obs_facing;
      record.source_wall = obs.wall_id;
      record.source_face = obs.face;
      planes_.emplace(assoc.plane, std::move(record));
      assoc.created = true;
    }
    auto& record = planes_.at(assoc.plane);
    record.sightings.push_back({keyframe, obs.segments});
    record.keyframes.insert(keyframe);
    out.push_back(assoc);
  }
  return out;
}

void SGraph::add_plane_factors(VariableId keyframe,
                               const std::vector<PlaneObservation>& observations,
                               const std::vector<Association>& associations) {
  const Eigen::MatrixXd info = config_.information.pose_plane.asDiagonal();
  std::set<VariableId> done;
  for (const auto& assoc : associations) {
    if (!done.insert(assoc.plane).second) continue;
    const Plane& p = observations.at(assoc.observation).plane;
    graph_.add_factor(FactorKind::PosePlane, {keyframe, assoc.plane}, plane_value(p), info);
  }
}

std::vector<Interval> SGraph::extent(VariableId id) const {
  const PlaneRecord& record = planes_.at(id);
  const Eigen::Vector2d t = tangent(plane(id).normal);
  std::vector<Interval> raw;
  for (const auto& sighting : record.sightings) {
    if (!graph_.contains(sighting.keyframe)) continue;
    const Pose2 pose = pose_of(graph_, sighting.keyframe);
    for (const auto& seg : sighting.segments) {
      const double a = t.dot(pose.apply(seg.a));
      const double b = t.dot(pose.apply(seg.b));
      raw.emplace_back(std::min(a, b), std::max(a, b));
    }
  }
  std::sort(raw.begin(), raw.end());
  std::vector<Interval> merged;
  for (const auto& iv : raw) {
    if (!merged.empty() && iv.first - merged.back().second <= config_.extent_merge_gap) {
      merged.back().second = std::max(merged.back().second, iv.second);
    } else {
      merged.push_back(iv);
    }
  }
  return merged;
}

std::vector<Segment> SGraph::extent_segments(VariableId id) const {
  const Plane p = plane(id);
  const Eigen::Vector2d t = tangent(p.normal);
  const Eigen::Vector2d base = p.closest_point();
  std::vector<Segment> out;
  for (const auto& [lo, hi] : extent(id)) out.push_back({base + lo * t, base + hi * t});
  return out;
}

RoomDetection SGraph::detect_rooms() {
  RoomDetection result;
  std::vector<PlaneInfo> info;
  info.reserve(planes_.size());
  for (const auto& [id, record] : planes_) {
    PlaneInfo pi{id, plane(id), facing(id), extent(id), {}};
    const Eigen::Vector2d t = tangent(pi.plane.normal);
    for (const auto& [lo, hi] : pi.extent) {
      pi.segments.push_back({pi.plane.closest_point() + lo * t, pi.plane.closest_point() + hi * t});
    }
    info.push_back(std::move(pi));
  }

  const double antiparallel = -std::cos(config_.assoc_max_dphi);
  std::vector<OpposedPair> pairs;
  for (std::size_t i = 0; i < info.size(); ++i) {
    for (std::size_t j = i + 1; j < info.size(); ++j) {
      const auto& a = info[i];
      const auto& b = info[j];
      if (a.facing.dot(b.facing) > antiparallel) continue;
      const double gap = a.facing.dot(b.plane.closest_point() - a.plane.closest_point());
      const double back = b.facing.dot(a.plane.closest_point() - b.plane.closest_point());
      if (gap <= 0.0 || back <= 0.0) continue;
      if (gap < config_.room_min_gap || gap > config_.room_max_gap) continue;
      pairs.push_back({i, j, gap});
    }
  }

  // Segments of every plane except those listed, tested against a box in a local frame.
  auto region_crossed = [&](const Eigen::Vector2d& center, const Eigen::Vector2d& eu,
                            double hu, double hv, std::initializer_list<std::size_t> skip) {
    const Eigen::Vector2d ev = tangent(eu);
    for (std::size_t k = 0; k < info.size(); ++k) {
      if (std::find(skip.begin(), skip.end(), k) != skip.end()) continue;
      for (const auto& seg : info[k].segments) {
        const Eigen::Vector2d a(eu.dot(seg.a - center), ev.dot(seg.a - center));
        const Eigen::Vector2d b(eu.dot(seg.b - center), ev.dot(seg.b - center));
        if (segment_hits_box(a, b, hu, hv)) return true;
      }
    }
    return false;
  };

  auto side_supported = [&](const PlaneInfo& p, const Plane& cut1, const Plane& cut2) {
    const Eigen::Vector2d t = tangent(p.plane.normal);
    const double s1 = t.dot(intersect_lines(p.plane, cut1));
    const double s2 = t.dot(intersect_lines(p.plane, cut2));
    const double lo = std::min(s1, s2);
    const double hi = std::max(s1, s2);
    const double need = std::min(kMinSideOverlap, kMinSideFraction * (hi - lo));
    return total_overlap(p.extent, lo, hi) >= need;
  };

  for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
    for (std::size_t qi = pi + 1; qi < pairs.size(); ++qi) {
      OpposedPair x = pairs[pi];
      OpposedPair y = pairs[qi];
      if (x.a == y.a || x.a == y.b || x.b == y.a || x.b == y.b) continue;
      if (std::abs(info[x.a].facing.dot(info[y.a].facing)) >= config_.perpendicular_tolerance) continue;
      if (std::abs(info[x.a].facing.x()) < std::abs(info[y.a].facing.x())) std::swap(x, y);

      // +x surface looks towards -x, +y surface towards -y.
      const std::size_t px = info[x.a].facing.x() < 0.0 ? x.a : x.b;
      const std::size_t nx = px == x.a ? x.b : x.a;
      const std::size_t py = info[y.a].facing.y() < 0.0 ? y.a : y.b;
      const std::size_t ny = py == y.a ? y.b : y.a;
      const std::array<std::size_t, 4> quad{px, nx, py, ny};

      const Eigen::Vector2d center =
          compute_room_center(info[px].plane, info[nx].plane, info[py].plane, info[ny].plane);
      bool duplicate = false;
      for (const auto& [room, planes] : rooms_) {
        if ((graph_.value(room).head<2>() - center).norm() < config_.duplicate_room_distance) {
          duplicate = true;
          break;
        }
      }
      if (duplicate) continue;

      if (!side_supported(info[px], info[py].plane, info[ny].plane) ||
          !side_supported(info[nx], info[py].plane, info[ny].plane) ||
          !side_supported(info[py], info[px].plane, info[nx].plane) ||
          !side_supported(info[ny], info[px].plane, info[nx].plane)) {
        continue;
      }

      const Eigen::Vector2d eu = info[nx].facing;
      const double hu = 0.5 * x.gap - kInteriorMargin;
      const double hv = 0.5 * y.gap - kInteriorMargin;
      if (region_crossed(center, eu, hu, hv, {px, nx, py, ny})) continue;

      const VariableId room = graph_.add_variable(VariableKind::Room, center);
      std::array<VariableId, 4> ids{};
      for (int k = 0; k < 4; ++k) ids[k] = info[quad[k]].id;
      graph_.add_factor(FactorKind::RoomToWalls, {room, ids[0], ids[1], ids[2], ids[3]},
                        Eigen::VectorXd(0), config_.information.structure.asDiagonal());
      rooms_.emplace(room, ids);
      result.rooms.push_back(room);

      for (auto it = two_wall_.begin(); it != two_wall_.end();) {
        const auto& [g1, g2] = it->second;
        if (same_pair(g1, g2, ids[0], ids[1]) || same_pair(g1, g2, ids[2], ids[3])) {
          graph_.remove_variable(it->first);
          result.removed_two_wall_rooms.push_back(it->first);
          it = two_wall_.erase(it);
        } else {
          ++it;
        }
      }
    }
  }

  // Tangent midpoint of the longest stretch both surfaces cover, if the region between
  // them over that stretch is empty.
  auto open_stretch = [&](std::size_t ia, std::size_t ib) -> std::optional<double> {
    const auto& a = info[ia];
    const auto& b = info[ib];
    const Eigen::Vector2d t = tangent(a.plane.normal);
    double best_lo = 0.0;
    double best_hi = 0.0;
    for (const auto& [alo, ahi] : a.extent) {
      for (const auto& seg : b.segments) {
        const double s1 = t.dot(seg.a);
        const double s2 = t.dot(seg.b);
        const double lo = std::max(alo, std::min(s1, s2));
        const double hi = std::min(ahi, std::max(s1, s2));
        if (hi - lo > best_hi - best_lo) {
          best_lo = lo;
          best_hi = hi;
        }
      }
    }
    if (best_hi - best_lo <= 0.0) return std::nullopt;
    const double mid = 0.5 * (best_lo + best_hi);
    const double gap = std::abs(a.plane.signed_distance(b.plane.closest_point()));
    const Eigen::Vector2d center =
        a.plane.closest_point() + a.facing * (0.5 * gap) + mid * t;
    if (region_crossed(center, a.facing, 0.5 * gap - kInteriorMargin, 0.5 * (best_hi - best_lo),
                       {ia, ib})) {
      return std::nullopt;
    }
    return mid;
  };

  std::map<VariableId, std::size_t> index_of;
  for (std::size_t k = 0; k < info.size(); ++k) index_of[info[k].id] = k;
  for (auto it = two_wall_.begin(); it != two_wall_.end();) {
    if (open_stretch(index_of.at(it->second[0]), index_of.at(it->second[1]))) {
      ++it;
      continue;
    }
    graph_.remove_variable(it->first);
    result.removed_two_wall_rooms.push_back(it->first);
    it = two_wall_.erase(it);
  }

  for (const auto& pair : pairs) {
    const auto& a = info[pair.a];
    const auto& b = info[pair.b];
    bool known = false;
    for (const auto& [room, ids] : rooms_) {
      known = known || same_pair(a.id, b.id, ids[0], ids[1]) || same_pair(a.id, b.id, ids[2], ids[3]);
    }
    for (const auto& [gamma, ids] : two_wall_) known = known || same_pair(a.id, b.id, ids[0], ids[1]);
    if (known) continue;

    const auto& ka = planes_.at(a.id).keyframes;
    const auto& kb = planes_.at(b.id).keyframes;
    std::vector<VariableId> common;
    std::set_intersection(ka.begin(), ka.end(), kb.begin(), kb.end(), std::back_inserter(common));
    if (static_cast<int>(common.size()) < config_.two_wall_min_keyframes) continue;

    const auto mid = open_stretch(pair.a, pair.b);
    if (!mid) continue;
    const Eigen::Vector2d anchor = *mid * tangent(a.plane.normal);
    const Eigen::VectorXd va = graph_.value(a.id);
    const Eigen::VectorXd vb = graph_.value(b.id);
    const Eigen::Vector2d value = plane_math::wall_center(va(0), va(1), vb(0), vb(1), anchor).value;
    const VariableId gamma = graph_.add_variable(VariableKind::TwoWallRoom, value);
    graph_.add_factor(FactorKind::WallCenter, {gamma, a.id, b.id}, anchor,
                      config_.information.structure.asDiagonal());
    two_wall_.emplace(gamma, std::array<VariableId, 2>{a.id, b.id});
    result.two_wall_rooms.push_back(gamma);
  }
  return result;
}

void SGraph::update_floor() {
  if (floor_) {
    graph_.remove_variable(*floor_);
    floor_.reset();
  }
  if (rooms_.empty()) return;
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& [room, ids] : rooms_) centroid += graph_.value(room).head<2>();
  centroid /= static_cast<double>(rooms_.size());
  floor_ = graph_.add_variable(VariableKind::Floor, centroid);
  const Eigen::MatrixXd info = config_.information.floor.asDiagonal();
  for (const auto& [room, ids] : rooms_) {
    graph_.add_factor(FactorKind::FloorToRoom, {*floor_, room},
                      Eigen::VectorXd(graph_.value(room).head<2>() - centroid), info);
  }
}

SolveReport SGraph::optimize() { return planloc::optimize(graph_, config_.solver); }

UpdateReport SGraph::update(const UpdateInput& input) {
  UpdateReport report;
  report.keyframe = add_keyframe(input.initial_pose.value_or(Pose2::identity()), input.odometry);
  if (input.ground_truth) ground_truth_.push_back(*input.ground_truth);
  report.associations = associate_planes(report.keyframe, input.observations);
  add_plane_factors(report.keyframe, input.observations, report.associations);
  report.detection = detect_rooms();
  if (!report.detection.rooms.empty()) update_floor();
  if (config_.optimize_each_update) report.solve = optimize();
  return report;
}

}  // namespace planloc
