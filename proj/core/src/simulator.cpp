#include "planloc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "planloc/errors.hpp"

namespace planloc {
namespace {

constexpr double kSampleSpacing = 0.25;
constexpr int kMinVisibleSamples = 3;
constexpr double kMinPlaneDistance = 0.3;

struct Slab {
  std::string wall_id;
  Eigen::Vector2d origin;
  Eigen::Vector2d u;  // along the wall
  Eigen::Vector2d n;  // across the wall
  double length = 0.0;
  double half = 0.0;
  std::vector<std::pair<double, double>> openings;  // along-wall door intervals
  std::vector<std::pair<double, double>> solids;    // complement of the openings in [0, length]
};

std::vector<Slab> make_slabs(const FloorPlan& plan) {
  std::vector<Slab> slabs;
  for (const auto& w : plan.walls) {
    Slab s;
    s.wall_id = w.id;
    s.origin = w.start;
    s.length = (w.end - w.start).norm();
    s.u = (w.end - w.start) / s.length;
    s.n = {-s.u.y(), s.u.x()};
    s.half = 0.5 * w.thickness;
    for (const auto& d : plan.doorways) {
      const auto wid = doorway_wall(plan, d);
      if (!wid || *wid != w.id) continue;
      const double c = s.u.dot(d.position - s.origin);
      s.openings.emplace_back(c - 0.5 * d.width, c + 0.5 * d.width);
    }
    std::sort(s.openings.begin(), s.openings.end());
    double cursor = 0.0;
    for (const auto& [lo, hi] : s.openings) {
      if (lo > cursor) s.solids.emplace_back(cursor, std::min(lo, s.length));
      cursor = std::max(cursor, hi);
    }
    if (cursor < s.length) s.solids.emplace_back(cursor, s.length);
    slabs.push_back(std::move(s));
  }
  return slabs;
}

// Liang-Barsky: does segment p->q pass through the open box [s0,s1]x[-h,h] (local coords)?
bool segment_hits_box(const Eigen::Vector2d& p, const Eigen::Vector2d& q, double s0, double s1,
                      double h) {
  constexpr double kShrink = 1e-9;
  double t0 = 0.0;
  double t1 = 1.0;
  const Eigen::Vector2d d = q - p;
  const double lo[2] = {s0 + kShrink, -h + kShrink};
  const double hi[2] = {s1 - kShrink, h - kShrink};
  for (int k = 0; k < 2; ++k) {
    if (std::abs(d(k)) < 1e-15) {
      if (p(k) <= lo[k] || p(k) >= hi[k]) return false;
      continue;
    }
    double a = (lo[k] - p(k)) / d(k);
    double b = (hi[k] - p(k)) / d(k);
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
    if (t0 >= t1) return false;
  }
  return t1 - t0 > 1e-12;
}

bool blocked(const std::vector<Slab>& slabs, const std::string& own_wall,
             const Eigen::Vector2d& from, const Eigen::Vector2d& to) {
  for (const auto& s : slabs) {
    if (s.wall_id == own_wall) continue;
    const Eigen::Vector2d p(s.u.dot(from - s.origin), s.n.dot(from - s.origin));
    const Eigen::Vector2d q(s.u.dot(to - s.origin), s.n.dot(to - s.origin));
    if (std::max(p.x(), q.x()) <= 0.0 || std::min(p.x(), q.x()) >= s.length) continue;
    if (std::max(p.y(), q.y()) <= -s.half || std::min(p.y(), q.y()) >= s.half) continue;
    for (const auto& [lo, hi] : s.solids) {
      if (segment_hits_box(p, q, lo, hi, s.half)) return true;
    }
  }
  return false;
}

bool in_opening(const Slab& s, double along) {
  return std::any_of(s.openings.begin(), s.openings.end(),
                     [&](const auto& o) { return along > o.first && along < o.second; });
}

Plane to_body(const Plane& plane, const Pose2& pose) {
  const Eigen::Vector2d n = pose.rotation().transpose() * plane.normal;
  const double d = plane.dist - plane.normal.dot(pose.translation());
  return normalize_away_from_origin(n, d, Frame::Map);
}

std::vector<PlaneObservation> observe_impl(const std::vector<WallSurfaces>& surfaces,
                                           const std::vector<Slab>& slabs, const Pose2& pose,
                                           double range) {
  std::vector<PlaneObservation> out;
  const Eigen::Vector2d robot = pose.translation();
  for (std::size_t w = 0; w < surfaces.size(); ++w) {
    const Slab& slab = slabs[w];
    for (int face = 0; face < 2; ++face) {
      const WallSurface& surf = face == 0 ? surfaces[w].first : surfaces[w].second;
      const Eigen::Vector2d a = surf.a;
      const double length = (surf.b - surf.a).norm();
      const Eigen::Vector2d dir = (surf.b - surf.a) / length;
      if (surf.facing.dot(robot - a) <= 0.0) continue;
      if (std::abs(surf.plane.normal.dot(robot) - surf.plane.dist) < kMinPlaneDistance) continue;

      const int count = std::max(1, static_cast<int>(std::floor(length / kSampleSpacing)));
      const double step = length / count;
      std::vector<std::pair<int, double>> visible;
      for (int k = 0; k < count; ++k) {
        const double t = (k + 0.5) * step;
        const Eigen::Vector2d p = a + t * dir;
        const double along_wall = slab.u.dot(p - slab.origin);
        if (in_opening(slab, along_wall)) continue;
        if ((p - robot).norm() > range) continue;
        if (blocked(slabs, slab.wall_id, robot, p)) continue;
        visible.emplace_back(k, t);
      }
      if (static_cast<int>(visible.size()) < kMinVisibleSamples) continue;

      PlaneObservation obs;
      obs.plane = to_body(surf.plane, pose);
      obs.facing = pose.rotation().transpose() * surf.facing;
      obs.wall_id = surfaces[w].wall_id;
      obs.face = face;
      const Pose2 inv = pose.inverse();
      std::size_t i = 0;
      while (i < visible.size()) {
        std::size_t j = i;
        while (j + 1 < visible.size() && visible[j + 1].first == visible[j].first + 1) ++j;
        const double t0 = std::max(0.0, visible[i].second - 0.5 * step);
        const double t1 = std::min(length, visible[j].second + 0.5 * step);
        obs.segments.push_back({inv.apply(a + t0 * dir), inv.apply(a + t1 * dir)});
        i = j + 1;
      }
      out.push_back(std::move(obs));
    }
  }
  return out;
}

}  // namespace

struct Scene {
  std::vector<WallSurfaces> surfaces;
  std::vector<Slab> slabs;
};

void SimConfig::validate() const {
  if (waypoints.size() < 2) throw InvalidInput("simulation needs at least 2 waypoints");
  if (!(keyframe_spacing > 0.0)) throw InvalidInput("keyframe_spacing must be positive");
  if (!(sensor_range > 0.0)) throw InvalidInput("sensor_range must be positive");
  if (!(sigma_xy >= 0.0) || !(sigma_theta >= 0.0) || !(sigma_phi >= 0.0) || !(sigma_d >= 0.0)) {
    throw InvalidInput("noise standard deviations must be non-negative");
  }
  if (max_steps < 0) throw InvalidInput("max_steps must be non-negative");
}

std::vector<Pose2> sample_path(const std::vector<Eigen::Vector2d>& waypoints, double spacing) {
  struct Piece {
    Eigen::Vector2d a, dir;
    double start, length;
  };
  std::vector<Piece> pieces;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    const Eigen::Vector2d d = waypoints[i + 1] - waypoints[i];
    const double len = d.norm();
    if (len <= 1e-12) continue;
    pieces.push_back({waypoints[i], d / len, total, len});
    total += len;
  }
  std::vector<Pose2> poses;
  if (pieces.empty()) return poses;
  std::size_t seg = 0;
  for (int k = 0;; ++k) {
    const double s = k * spacing;
    if (s > total + 1e-9) break;
    while (seg + 1 < pieces.size() && s >= pieces[seg + 1].start) ++seg;
    const Piece& p = pieces[seg];
    const Eigen::Vector2d pos = p.a + std::min(s - p.start, p.length) * p.dir;
    poses.emplace_back(pos.x(), pos.y(), std::atan2(p.dir.y(), p.dir.x()));
  }
  return poses;
}

bool in_free_space(const FloorPlan& plan, const Eigen::Vector2d& p) {
  for (const auto& room : plan.rooms) {
    if (room_box(plan, room).contains(p)) return true;
  }
  for (const auto& d : plan.doorways) {
    const auto wid = doorway_wall(plan, d);
    if (!wid) continue;
    const PlanWall& w = plan.wall(*wid);
    const Eigen::Vector2d u = (w.end - w.start).normalized();
    const Eigen::Vector2d n(-u.y(), u.x());
    const double along = u.dot(p - w.start) - u.dot(d.position - w.start);
    const double across = n.dot(p - w.start);
    if (std::abs(along) <= 0.5 * d.width && std::abs(across) <= 0.5 * w.thickness + 1e-9) {
      return true;
    }
  }
  return false;
}

void check_path_free(const FloorPlan& plan, const std::vector<Eigen::Vector2d>& waypoints) {
  constexpr double kStep = 0.02;
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    const Eigen::Vector2d a = waypoints[i];
    const Eigen::Vector2d b = waypoints[i + 1];
    const int n = std::max(1, static_cast<int>(std::ceil((b - a).norm() / kStep)));
    for (int k = 0; k <= n; ++k) {
      const Eigen::Vector2d p = a + (b - a) * (static_cast<double>(k) / n);
      if (!in_free_space(plan, p)) {
        std::ostringstream msg;
        msg << "waypoint path leaves free space at (" << p.x() << ", " << p.y()
            << ") between waypoints " << i << " and " << i + 1;
        throw InvalidInput(msg.str());
      }
    }
  }
}

std::vector<PlaneObservation> observe(const FloorPlan& plan, const Pose2& pose, double range) {
  return observe_impl(extract_wall_surfaces(plan), make_slabs(plan), pose, range);
}

Simulator::Simulator(FloorPlan plan, SimConfig config)
    : plan_(std::move(plan)), config_(std::move(config)), rng_(config_.seed) {
  config_.validate();
  validate_plan(plan_);
  check_path_free(plan_, config_.waypoints);
  poses_ = sample_path(config_.waypoints, config_.keyframe_spacing);
  if (config_.max_steps > 0 && poses_.size() > static_cast<std::size_t>(config_.max_steps)) {
    poses_.resize(static_cast<std::size_t>(config_.max_steps));
  }
  if (poses_.empty()) throw InvalidInput("waypoint path has zero length");
  scene_ = std::make_shared<const Scene>(Scene{extract_wall_surfaces(plan_), make_slabs(plan_)});
  offset_ = config_.map_offset.value_or(poses_.front());
}

Pose2 Simulator::initial_map_pose() const { return compose(offset_.inverse(), poses_.front()); }

SimStep Simulator::step() {
  if (done()) throw InvalidInput("simulation already finished");
  std::normal_distribution<double> gauss(0.0, 1.0);
  SimStep out;
  out.index = static_cast<int>(next_);
  out.ground_truth = poses_[next_];
  if (next_ > 0) {
    const Pose2 rel = between(poses_[next_ - 1], poses_[next_]);
    const double nx = config_.sigma_xy * gauss(rng_);
    const double ny = config_.sigma_xy * gauss(rng_);
    const double nt = config_.sigma_theta * gauss(rng_);
    out.odometry = Pose2(rel.x + nx, rel.y + ny, rel.theta + nt);
  }
  out.observations = observe_impl(scene_->surfaces, scene_->slabs, out.ground_truth, config_.sensor_range);
  for (auto& obs : out.observations) {
    const double phi = obs.plane.azimuth() + config_.sigma_phi * gauss(rng_);
    const double d = obs.plane.dist + config_.sigma_d * gauss(rng_);
    const double dphi = phi - obs.plane.azimuth();
    obs.plane = normalize_away_from_origin({std::cos(phi), std::sin(phi)}, d, Frame::Map);
    obs.facing = rotation(dphi) * obs.facing;
  }
  ++next_;
  return out;
}

}  // namespace planloc
