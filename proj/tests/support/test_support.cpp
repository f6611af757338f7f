#include "test_support.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "planloc/a_graph.hpp"
#include "planloc/factors.hpp"
#include "planloc/scenario.hpp"

namespace planloc::test {

std::filesystem::path data_path(const std::string& relative) {
  return std::filesystem::path(PLANLOC_TEST_DATA_DIR) / relative;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

SGraph traverse(const FloorPlan& plan, const SimConfig& sim_config, SGraphConfig config) {
  config.information = noise_information(sim_config, config.information);
  SGraph s(config);
  Simulator sim(plan, sim_config);
  while (!sim.done()) {
    const SimStep step = sim.step();
    UpdateInput in;
    in.odometry = step.odometry;
    in.observations = step.observations;
    in.ground_truth = step.ground_truth;
    if (step.index == 0) in.initial_pose = sim.initial_map_pose();
    s.update(in);
  }
  return s;
}

namespace {

std::array<VariableId, 4> walls_of(const FactorGraph& g, VariableId room) {
  for (FactorId f : g.factors_of(room)) {
    if (f.kind != FactorKind::RoomToWalls) continue;
    const auto& v = g.factor(f).variables;
    return {v[1], v[2], v[3], v[4]};
  }
  throw std::logic_error("room without RoomToWalls");
}

Plane plane_at(const FactorGraph& g, VariableId id) {
  return plane_from_value(g.value(id), g.variable(id).frame);
}

struct OracleRoom {
  VariableId id;
  Eigen::Vector2d center;
  Eigen::Vector2d dims;
};

std::vector<OracleRoom> oracle_rooms(const FactorGraph& g) {
  std::vector<OracleRoom> out;
  for (VariableId r : g.variables_of(VariableKind::Room)) {
    bool four_walls = false;
    for (FactorId f : g.factors_of(r)) four_walls = four_walls || f.kind == FactorKind::RoomToWalls;
    if (!four_walls) continue;
    const auto w = walls_of(g, r);
    auto gap = [&](VariableId p, VariableId q) {
      const Plane a = plane_at(g, p);
      const Plane b = plane_at(g, q);
      return std::abs((b.closest_point() - a.closest_point()).dot(a.normal));
    };
    out.push_back({r, g.value(r).head<2>(), {gap(w[0], w[1]), gap(w[2], w[3])}});
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
  return out;
}

}  // namespace

double kabsch_rms(const std::vector<Eigen::Vector2d>& a, const std::vector<Eigen::Vector2d>& s) {
  Eigen::Vector2d ma = Eigen::Vector2d::Zero();
  Eigen::Vector2d ms = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    ms += s[i];
  }
  ma /= static_cast<double>(a.size());
  ms /= static_cast<double>(a.size());
  Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < a.size(); ++i) h += (s[i] - ms) * (a[i] - ma).transpose();
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix2d d = Eigen::Matrix2d::Identity();
  d(1, 1) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
  const Eigen::Matrix2d r = svd.matrixV() * d * svd.matrixU().transpose();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (r * (s[i] - ms) + ma - a[i]).squaredNorm();
  return std::sqrt(sum / static_cast<double>(a.size()));
}

std::map<Assignment, double> brute_force_room_pairs(const FactorGraph& a, const FactorGraph& s,
                                                    const MatcherConfig& config) {
  const auto ar = oracle_rooms(a);
  const auto sr = oracle_rooms(s);
  std::map<Assignment, double> out;
  if (sr.size() < 2 || ar.size() < sr.size()) return out;
  std::vector<std::size_t> chosen(sr.size());
  std::vector<bool> used(ar.size(), false);
  auto dims_ok = [&](const Eigen::Vector2d& x, const Eigen::Vector2d& y) {
    const double g = config.dimension_gate;
    return (std::abs(x.x() - y.x()) <= g && std::abs(x.y() - y.y()) <= g) ||
           (std::abs(x.x() - y.y()) <= g && std::abs(x.y() - y.x()) <= g);
  };
  auto visit = [&](auto&& self, std::size_t i) -> void {
    if (i == sr.size()) {
      std::vector<Eigen::Vector2d> ac;
      std::vector<Eigen::Vector2d> sc;
      for (std::size_t j = 0; j < sr.size(); ++j) {
        ac.push_back(ar[chosen[j]].center);
        sc.push_back(sr[j].center);
        if (!dims_ok(ar[chosen[j]].dims, sr[j].dims)) return;
        for (std::size_t k = 0; k < j; ++k) {
          const double da = (ar[chosen[j]].center - ar[chosen[k]].center).norm();
          const double ds = (sr[j].center - sr[k].center).norm();
          if (std::abs(da - ds) > config.distance_gate) return;
        }
      }
      const double affinity = std::exp(-kabsch_rms(ac, sc) / config.room_scale);
      if (affinity < config.room_affinity_min) return;
      Assignment key;
      for (std::size_t j = 0; j < sr.size(); ++j) key.emplace_back(sr[j].id, ar[chosen[j]].id);
      out.emplace(std::move(key), affinity);
      return;
    }
    for (std::size_t k = 0; k < ar.size(); ++k) {
      if (used[k]) continue;
      used[k] = true;
      chosen[i] = k;
      self(self, i + 1);
      used[k] = false;
    }
  };
  visit(visit, 0);
  return out;
}

FactorGraph synthetic_s_graph(const AGraph& a, const std::vector<std::string>& rooms,
                              const Pose2& offset, double sigma_d, double sigma_phi,
                              std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  const FrameTransform to_map{offset.inverse(), Frame::Plan, Frame::Map};
  FactorGraph s;
  std::map<VariableId, VariableId> planes;
  for (const auto& id : rooms) {
    const VariableId ar = a.rooms.at(id);
    const Eigen::Vector2d c = to_map.apply(a.graph.value(ar).head<2>());
    const VariableId sr = s.add_variable(
        VariableKind::Room, Eigen::Vector2d(c + sigma_d * Eigen::Vector2d(n01(rng), n01(rng))));
    std::vector<VariableId> vars = {sr};
    for (VariableId ap : walls_of(a.graph, ar)) {
      auto it = planes.find(ap);
      if (it == planes.end()) {
        const Plane p = transform_plane(to_map, plane_at(a.graph, ap));
        Eigen::Vector2d v = plane_value(p);
        v += Eigen::Vector2d(sigma_phi * n01(rng), sigma_d * n01(rng));
        it = planes.emplace(ap, s.add_variable(VariableKind::PlaneVar, v)).first;
      }
      vars.push_back(it->second);
    }
    for (FactorId f : a.graph.factors_of(ar)) {
      if (f.kind != FactorKind::RoomToWalls) continue;
      s.add_factor(FactorKind::RoomToWalls, vars, Eigen::VectorXd(0), a.graph.factor(f).information);
    }
  }
  return s;
}

std::map<Assignment, double> as_assignments(const std::vector<MatchCandidate>& candidates) {
  std::map<Assignment, double> out;
  for (const auto& c : candidates) {
    Assignment key;
    for (const auto& p : c.room_pairs()) key.emplace_back(p.s_node, p.a_node);
    std::sort(key.begin(), key.end());
    if (!out.emplace(key, c.affinity).second) throw std::logic_error("duplicate candidate");
  }
  return out;
}

FactorGraph random_factor_zoo(std::mt19937_64& rng) {
  constexpr double kPi = std::numbers::pi;
  auto u = [&](double lo, double hi) { return uniform(rng, lo, hi); };
  auto vec = [](std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
  };
  auto info = [&](int n) {
    Eigen::MatrixXd a(n, n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) a(r, c) = u(-1, 1);
    }
    return Eigen::MatrixXd(a * a.transpose() + Eigen::MatrixXd::Identity(n, n));
  };
  auto plane = [&](double phi) { return vec({phi, u(0.5, 8.0)}); };

  FactorGraph g;
  const auto k0 = g.add_variable(VariableKind::Keyframe, vec({u(-5, 5), u(-5, 5), u(-kPi, kPi)}));
  const auto k1 = g.add_variable(VariableKind::Keyframe, vec({u(-5, 5), u(-5, 5), u(-kPi, kPi)}));
  g.add_factor(FactorKind::Odometry, {k0, k1}, vec({u(-2, 2), u(-2, 2), u(-kPi, kPi)}), info(3));

  // Pose-plane factors with measurements close to either representative of the prediction.
  for (int i = 0; i < 3; ++i) {
    const auto p = g.add_variable(VariableKind::PlaneVar, plane(u(-kPi, kPi)));
    const auto k = i % 2 == 0 ? k0 : k1;
    const Eigen::VectorXd kv = g.value(k);
    const Eigen::VectorXd pv = g.value(p);
    double phi_b = pv(0) - kv(2);
    double d_b = pv(1) - std::cos(pv(0)) * kv(0) - std::sin(pv(0)) * kv(1);
    if (d_b < 0) {
      phi_b += kPi;
      d_b = -d_b;
    }
    g.add_factor(FactorKind::PosePlane, {k, p},
                 vec({wrap_angle(phi_b + u(-0.3, 0.3)), d_b + u(-0.3, 0.3)}), info(2));
  }

  // Room bounded by two x-ish and two y-ish planes.
  const double yaw = u(-0.3, 0.3);
  const auto px = g.add_variable(VariableKind::PlaneVar, plane(yaw));
  const auto nx = g.add_variable(VariableKind::PlaneVar, plane(yaw + kPi + u(-0.1, 0.1)));
  const auto py = g.add_variable(VariableKind::PlaneVar, plane(yaw + kPi / 2));
  const auto ny = g.add_variable(VariableKind::PlaneVar, plane(wrap_angle(yaw - kPi / 2)));
  const auto room = g.add_variable(VariableKind::Room, vec({u(-5, 5), u(-5, 5)}));
  g.add_factor(FactorKind::RoomToWalls, {room, px, nx, py, ny}, Eigen::VectorXd(0), info(2));

  // Wall center on parallel and antiparallel pairs, plus a two-wall room.
  const auto wall = g.add_variable(VariableKind::Wall, vec({u(-5, 5), u(-5, 5)}));
  const double phi_w = u(-kPi, kPi);
  const auto w1 = g.add_variable(VariableKind::PlaneVar, plane(phi_w));
  const auto w2 = g.add_variable(VariableKind::PlaneVar, plane(phi_w + u(-0.2, 0.2)));
  g.add_factor(FactorKind::WallCenter, {wall, w1, w2}, vec({u(-5, 5), u(-5, 5)}), info(2));
  const auto gamma = g.add_variable(VariableKind::TwoWallRoom, vec({u(-5, 5), u(-5, 5)}));
  g.add_factor(FactorKind::WallCenter, {gamma, px, nx}, vec({u(-5, 5), u(-5, 5)}), info(2));

  const auto room2 = g.add_variable(VariableKind::Room, vec({u(-5, 5), u(-5, 5)}));
  const auto door = g.add_variable(VariableKind::Doorway, vec({u(-5, 5), u(-5, 5)}));
  g.add_factor(FactorKind::DoorwayToRooms, {door, room, room2},
               vec({u(-3, 3), u(-3, 3), u(-3, 3), u(-3, 3)}), info(2));

  // Merge factors, with and without the transform.
  const auto tf = g.add_variable(VariableKind::Transform, vec({u(-5, 5), u(-5, 5), u(-kPi, kPi)}));
  const auto plan_room = g.add_variable(VariableKind::Room, vec({u(-5, 5), u(-5, 5)}), Frame::Plan);
  g.add_factor(FactorKind::RoomToRoom, {plan_room, room, tf}, Eigen::VectorXd(0), info(2));
  g.add_factor(FactorKind::RoomToRoom, {room2, room}, Eigen::VectorXd(0), info(2));

  const Eigen::VectorXd tv = g.value(tf);
  for (int flip = 0; flip < 2; ++flip) {
    const auto map_plane = g.add_variable(VariableKind::PlaneVar, plane(u(-kPi, kPi)));
    const Eigen::VectorXd mv = g.value(map_plane);
    const double phi_plan = mv(0) + tv(2) + u(-0.5, 0.5) + (flip ? kPi : 0.0);
    const auto plan_plane = g.add_variable(VariableKind::PlaneVar,
                                           vec({wrap_angle(phi_plan), u(-8, 8)}), Frame::Plan);
    g.add_factor(FactorKind::PlaneToPlane, {plan_plane, map_plane, tf}, Eigen::VectorXd(0),
                 info(2));
  }
  g.add_factor(FactorKind::PlaneToPlane, {w1, w2}, Eigen::VectorXd(0), info(2));

  g.add_factor(FactorKind::Prior, {k0}, vec({u(-5, 5), u(-5, 5), u(-kPi, kPi)}), info(3));
  g.add_factor(FactorKind::Prior, {tf}, vec({u(-5, 5), u(-5, 5), u(-kPi, kPi)}), info(3));
  g.add_factor(FactorKind::Prior, {room}, vec({u(-5, 5), u(-5, 5)}), info(2));
  const Eigen::VectorXd wv = g.value(w1);
  g.add_factor(FactorKind::Prior, {w1}, vec({wrap_angle(wv(0) + u(-0.5, 0.5)), u(-8, 8)}),
               info(2));

  const auto floor = g.add_variable(VariableKind::Floor, vec({u(-5, 5), u(-5, 5)}));
  g.add_factor(FactorKind::FloorToRoom, {floor, room}, vec({u(-3, 3), u(-3, 3)}), info(2));
  return g;
}

}  // namespace planloc::test
