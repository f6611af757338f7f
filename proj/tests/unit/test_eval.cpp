#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "planloc/errors.hpp"
#include "planloc/eval.hpp"
#include "planloc/plans.hpp"
#include "test_support.hpp"

using namespace planloc;
using planloc::test::uniform;

namespace {

std::vector<Pose2> random_path(std::mt19937_64& rng, int n) {
  std::vector<Pose2> out;
  for (int i = 0; i < n; ++i) out.emplace_back(uniform(rng, -5, 5), uniform(rng, -5, 5), uniform(rng, -3, 3));
  return out;
}

// The -y surface of the single room, with a stretch of it.
struct Surface {
  WallSurface surface;
  std::string wall;
  int face = 0;
};

Surface south_face(const FloorPlan& plan) {
  const PlanRoom& room = plan.rooms.front();
  const WallSurface s = room_surface(plan, room, Side::NegY);
  const WallSurfaces faces = wall_surfaces(plan.wall(room.wall(Side::NegY)));
  return {s, room.wall(Side::NegY), faces.first.facing == s.facing ? 0 : 1};
}

}  // namespace

TEST(Ape, TranslationOffsetWithoutAlignment) {
  std::mt19937_64 rng(1);
  const auto gt = random_path(rng, 30);
  std::vector<Pose2> est = gt;
  for (auto& p : est) p.x += 0.1;
  const ApeReport r = compute_ape(est, gt);
  EXPECT_NEAR(r.rmse, 0.1, 1e-12);
  EXPECT_NEAR(r.mean, 0.1, 1e-12);
  EXPECT_NEAR(r.max, 0.1, 1e-12);
  EXPECT_EQ(r.per_pose.size(), 30u);
  EXPECT_EQ(r.alignment, Alignment::None);
}

TEST(Ape, StatisticsMatchHandComputation) {
  std::mt19937_64 rng(2);
  const auto gt = random_path(rng, 40);
  std::vector<Pose2> est = gt;
  std::vector<double> e;
  for (auto& p : est) {
    const double dx = uniform(rng, -0.2, 0.2);
    const double dy = uniform(rng, -0.2, 0.2);
    p.x += dx;
    p.y += dy;
    e.push_back(std::hypot(dx, dy));
  }
  double sq = 0.0;
  double sum = 0.0;
  double mx = 0.0;
  for (double v : e) {
    sq += v * v;
    sum += v;
    mx = std::max(mx, v);
  }
  const ApeReport r = compute_ape(est, gt);
  EXPECT_NEAR(r.rmse, std::sqrt(sq / 40), 1e-12);
  EXPECT_NEAR(r.mean, sum / 40, 1e-12);
  EXPECT_NEAR(r.max, mx, 1e-12);
  for (std::size_t i = 0; i < e.size(); ++i) EXPECT_NEAR(r.per_pose[i], e[i], 1e-12);
}

TEST(Ape, AlignmentRemovesARigidOffset) {
  std::mt19937_64 rng(3);
  const auto gt = random_path(rng, 25);
  const Pose2 t(3, -2, 1.1);
  std::vector<Pose2> est;
  for (const auto& p : gt) est.push_back(compose(t, p));
  EXPECT_GT(compute_ape(est, gt).rmse, 1.0);
  const ApeReport aligned = compute_ape(est, gt, Alignment::SE2Umeyama);
  EXPECT_LT(aligned.rmse, 1e-9);
  EXPECT_EQ(aligned.alignment, Alignment::SE2Umeyama);

  // With noise the aligned error never exceeds the raw one.
  for (auto& p : est) p.x += uniform(rng, -0.1, 0.1);
  EXPECT_LE(compute_ape(est, gt, Alignment::SE2Umeyama).rmse, compute_ape(est, gt).rmse + 1e-12);
}

TEST(Ape, RejectsBadInput) {
  const std::vector<Pose2> one = {Pose2()};
  const std::vector<Pose2> two = {Pose2(), Pose2(1, 0, 0)};
  EXPECT_THROW(compute_ape({}, {}), InvalidInput);
  EXPECT_THROW(compute_ape(one, two), InvalidInput);
}

TEST(MapRmse, ExactSurfaceScoresZero) {
  const FloorPlan plan = fixture_plan("single_room");
  const Surface s = south_face(plan);
  EstimatedPlane p{s.surface.plane, {{s.surface.a, s.surface.b}}, std::make_pair(s.wall, s.face)};
  const MapRmseReport r = compute_map_rmse(std::span(&p, 1), plan);
  EXPECT_NEAR(r.rmse, 0.0, 1e-12);
  EXPECT_GT(r.n_points, 10u);
}

TEST(MapRmse, ParallelOffset) {
  const FloorPlan plan = fixture_plan("single_room");
  const Surface s = south_face(plan);
  const Eigen::Vector2d shift = 0.05 * s.surface.plane.normal;
  Plane moved = s.surface.plane;
  moved.dist += 0.05;
  const Segment seg{s.surface.a + shift, s.surface.b + shift};
  // Length 2 m: samples every 0.1 m, ends included.
  const Eigen::Vector2d dir = (seg.b - seg.a).normalized();
  const Segment two_m{seg.a, seg.a + 2.0 * dir};
  for (bool known : {true, false}) {
    EstimatedPlane p{moved, {two_m}, std::nullopt};
    if (known) p.surface = std::make_pair(s.wall, s.face);
    const MapRmseReport r = compute_map_rmse(std::span(&p, 1), plan);
    EXPECT_NEAR(r.rmse, 0.05, 1e-9);
    EXPECT_EQ(r.n_points, 21u);
  }
}

TEST(MapRmse, TiltedPlaneMatchesSampleOracle) {
  const FloorPlan plan = fixture_plan("single_room");
  const Surface s = south_face(plan);
  const Eigen::Vector2d p0 = s.surface.a;
  const double alpha = 0.01;
  const Eigen::Vector2d along = (s.surface.b - p0).normalized();
  const Eigen::Vector2d dir = rotation(alpha) * along;
  const Eigen::Vector2d n(-dir.y(), dir.x());
  const Plane tilted = normalize_away_from_origin(n, n.dot(p0), Frame::Plan);
  const double start = 0.5;
  const double len = 3.0;
  EstimatedPlane p{tilted, {{p0 + start * dir, p0 + (start + len) * dir}}, std::make_pair(s.wall, s.face)};
  double sq = 0.0;
  int count = 0;
  for (int k = 0; k <= 30; ++k) {
    const double e = (start + 0.1 * k) * std::sin(alpha);
    sq += e * e;
    ++count;
  }
  const MapRmseReport r = compute_map_rmse(std::span(&p, 1), plan);
  EXPECT_EQ(r.n_points, static_cast<std::size_t>(count));
  EXPECT_NEAR(r.rmse, std::sqrt(sq / count), 1e-9);
}

TEST(MapRmse, UnassociatedPlanesAreSkipped) {
  const FloorPlan plan = fixture_plan("single_room");
  const Surface s = south_face(plan);
  Plane stray = s.surface.plane;
  stray.dist += 2.0;
  EstimatedPlane far{stray, {{s.surface.a, s.surface.b}}, std::nullopt};
  EXPECT_THROW(compute_map_rmse(std::span(&far, 1), plan), InvalidInput);
  const std::vector<EstimatedPlane> both = {
      far, {s.surface.plane, {{s.surface.a, s.surface.b}}, std::make_pair(s.wall, s.face)}};
  EXPECT_NEAR(compute_map_rmse(both, plan).rmse, 0.0, 1e-12);
  EXPECT_THROW(compute_map_rmse({}, plan), InvalidInput);
}

TEST(EvalJson, Fields) {
  ApeReport a;
  a.rmse = 0.1;
  a.per_pose = {0.1};
  a.alignment = Alignment::SE2Umeyama;
  const auto j = ape_to_json(a);
  EXPECT_DOUBLE_EQ(j.at("rmse").get<double>(), 0.1);
  EXPECT_EQ(j.at("per_pose").size(), 1u);
  EXPECT_EQ(j.at("alignment").get<std::string>(), to_string(Alignment::SE2Umeyama));
  const auto m = map_rmse_to_json({0.02, 7});
  EXPECT_EQ(m.at("n_points").get<std::size_t>(), 7u);
}
