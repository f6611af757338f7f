#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "planloc/errors.hpp"
#include "planloc/plans.hpp"
#include "planloc/simulator.hpp"

using namespace planloc;

namespace {

constexpr double kPi = std::numbers::pi;

SimConfig noiseless(std::vector<Eigen::Vector2d> waypoints) {
  SimConfig c;
  c.waypoints = std::move(waypoints);
  c.sigma_xy = c.sigma_theta = c.sigma_phi = c.sigma_d = 0.0;
  return c;
}

// Body-frame plane of a plan surface seen from `pose`, written out by hand.
Plane body_oracle(const Plane& world, const Pose2& pose) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  const Eigen::Vector2d n(c * world.normal.x() + s * world.normal.y(),
                          -s * world.normal.x() + c * world.normal.y());
  const double d = world.dist - world.normal.x() * pose.x - world.normal.y() * pose.y;
  return d >= 0 ? Plane{n, d, Frame::Map} : Plane{-n, -d, Frame::Map};
}

}  // namespace

TEST(SamplePath, SpacingAndHeading) {
  const auto poses = sample_path({{0, 0}, {2, 0}, {2, 1}}, 0.5);
  ASSERT_EQ(poses.size(), 7u);
  EXPECT_NEAR(poses[2].x, 1.0, 1e-12);
  EXPECT_NEAR(poses[2].theta, 0.0, 1e-12);
  EXPECT_NEAR(poses[5].y, 0.5, 1e-12);
  EXPECT_NEAR(poses[5].theta, kPi / 2, 1e-12);
}

TEST(Simulator, ZeroNoiseOdometryIsExact) {
  const FloorPlan plan = fixture_plan("corridor");
  const Box c = room_box(plan, plan.room("C"));
  const double y = c.center().y();
  Simulator sim(plan, noiseless({{c.xmin + 0.5, y}, {c.xmax - 0.5, y}}));
  Pose2 prev;
  while (!sim.done()) {
    const SimStep s = sim.step();
    if (s.index == 0) {
      EXPECT_FALSE(s.odometry.has_value());
    } else {
      ASSERT_TRUE(s.odometry.has_value());
      const Pose2 truth = between(prev, s.ground_truth);
      EXPECT_NEAR(s.odometry->x, truth.x, 1e-12);
      EXPECT_NEAR(s.odometry->y, truth.y, 1e-12);
      EXPECT_NEAR(s.odometry->theta, truth.theta, 1e-12);
    }
    prev = s.ground_truth;
  }
}

TEST(Observe, RoomCenterSeesTheFourSurfaces) {
  const FloorPlan plan = fixture_plan("single_room");
  const PlanRoom& room = plan.rooms.front();
  const Eigen::Vector2d center = room_box(plan, room).center();
  for (double theta : {0.0, 0.4, -2.0, kPi}) {
    const Pose2 pose(center.x(), center.y(), theta);
    const auto obs = observe(plan, pose, 12.0);
    ASSERT_EQ(obs.size(), 4u);
    for (Side side : kSides) {
      const WallSurface surface = room_surface(plan, room, side);
      const Plane expected = body_oracle(surface.plane, pose);
      int hits = 0;
      for (const auto& o : obs) {
        if (o.wall_id != room.wall(side)) continue;
        ++hits;
        EXPECT_NEAR((o.plane.normal - expected.normal).norm(), 0.0, 1e-12);
        EXPECT_NEAR(o.plane.dist, expected.dist, 1e-12);
        // Facing points back at the sensor.
        for (const auto& seg : o.segments) EXPECT_LT(o.facing.dot(seg.a), 0.0);
      }
      EXPECT_EQ(hits, 1) << to_string(side);
    }
  }
}

TEST(Observe, SegmentsLieOnThePlaneWithinRange) {
  const FloorPlan plan = fixture_plan("asym5");
  const auto waypoints = tour_waypoints(plan, "R1");
  for (const Pose2& pose : sample_path(waypoints, 1.0)) {
    for (const auto& o : observe(plan, pose, 6.0)) {
      ASSERT_FALSE(o.segments.empty());
      for (const auto& seg : o.segments) {
        EXPECT_NEAR(o.plane.signed_distance(seg.a), 0.0, 1e-9);
        EXPECT_NEAR(o.plane.signed_distance(seg.b), 0.0, 1e-9);
        // Segments cover whole sample cells, so ends may pass the range by half a cell.
        EXPECT_LE(seg.a.norm(), 6.0 + 0.25);
        EXPECT_LE(seg.b.norm(), 6.0 + 0.25);
      }
    }
  }
}

TEST(Observe, OuterFacesAreNeverSeenFromInside) {
  const FloorPlan plan = fixture_plan("two_room");
  const PlanRoom& a = plan.room("A");
  // The outer face of A's -x wall looks away from every room.
  const WallSurface inner = room_surface(plan, a, Side::NegX);
  const WallSurfaces faces = wall_surfaces(plan.wall(a.wall(Side::NegX)));
  const int outer_face = faces.first.facing == inner.facing ? 1 : 0;
  for (const Pose2& pose : sample_path(tour_waypoints(plan, "A"), 0.5)) {
    for (const auto& o : observe(plan, pose, 20.0)) {
      EXPECT_FALSE(o.wall_id == a.wall(Side::NegX) && o.face == outer_face);
    }
  }
}

TEST(Observe, WallsBehindOtherWallsAreOccluded) {
  // Next to the shared wall of the two-room plan, away from the doorway: no line of sight
  // to B's +x or -y walls passes the opening.
  const FloorPlan plan = fixture_plan("two_room");
  const Box a = room_box(plan, plan.room("A"));
  const PlanRoom& b = plan.room("B");
  const Pose2 pose(a.xmax - 0.3, a.ymin + 0.3, 0.0);
  const auto obs = observe(plan, pose, 20.0);
  EXPECT_FALSE(obs.empty());
  for (const auto& o : obs) {
    EXPECT_NE(o.wall_id, b.wall(Side::PosX));
    EXPECT_NE(o.wall_id, b.wall(Side::NegY));
  }
  // From the doorway itself B's +x wall is in plain view.
  const auto door = observe(plan, Pose2(6.0, 3.0, 0.0), 20.0);
  EXPECT_TRUE(std::any_of(door.begin(), door.end(),
                          [&](const PlaneObservation& o) { return o.wall_id == b.wall(Side::PosX); }));
}

TEST(Simulator, DeterministicPerSeed) {
  const FloorPlan plan = fixture_plan("asym5");
  SimConfig c;
  c.waypoints = tour_waypoints(plan, "R1");
  c.seed = 99;
  Simulator a(plan, c);
  Simulator b(plan, c);
  while (!a.done()) {
    const SimStep x = a.step();
    const SimStep y = b.step();
    ASSERT_EQ(x.odometry.has_value(), y.odometry.has_value());
    if (x.odometry) EXPECT_EQ(*x.odometry, *y.odometry);
    ASSERT_EQ(x.observations.size(), y.observations.size());
    for (std::size_t i = 0; i < x.observations.size(); ++i) {
      EXPECT_EQ(x.observations[i].plane.normal, y.observations[i].plane.normal);
      EXPECT_EQ(x.observations[i].plane.dist, y.observations[i].plane.dist);
    }
  }
  EXPECT_TRUE(b.done());
}

TEST(Simulator, OdometryNoiseHasConfiguredSpread) {
  const FloorPlan plan = fixture_plan("corridor");
  const Box c = room_box(plan, plan.room("C"));
  SimConfig cfg;
  cfg.waypoints = {{c.xmin + 0.3, c.center().y()}, {c.xmax - 0.3, c.center().y()}};
  cfg.keyframe_spacing = 0.05;
  cfg.sigma_xy = 0.01;
  cfg.sigma_theta = 0.002;
  double sx = 0.0;
  double st = 0.0;
  int n = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    cfg.seed = seed;
    Simulator sim(plan, cfg);
    Pose2 prev;
    while (!sim.done()) {
      const SimStep s = sim.step();
      if (s.odometry) {
        const Pose2 truth = between(prev, s.ground_truth);
        sx += std::pow(s.odometry->x - truth.x, 2);
        st += std::pow(wrap_angle(s.odometry->theta - truth.theta), 2);
        ++n;
      }
      prev = s.ground_truth;
    }
  }
  ASSERT_GT(n, 1000);
  EXPECT_NEAR(std::sqrt(sx / n), 0.01, 0.001);
  EXPECT_NEAR(std::sqrt(st / n), 0.002, 0.0002);
}

TEST(Simulator, MapOffsetDefaultsToFirstPose) {
  const FloorPlan plan = fixture_plan("asym5");
  SimConfig c;
  c.waypoints = tour_waypoints(plan, "R1");
  Simulator sim(plan, c);
  EXPECT_EQ(sim.map_offset(), sim.ground_truth().front());
  const Pose2 m = sim.initial_map_pose();
  EXPECT_NEAR(m.x, 0.0, 1e-12);
  EXPECT_NEAR(m.y, 0.0, 1e-12);
  EXPECT_NEAR(m.theta, 0.0, 1e-12);

  c.map_offset = Pose2(2, 1, 0.5);
  Simulator shifted(plan, c);
  const Pose2 back = compose(*c.map_offset, shifted.initial_map_pose());
  EXPECT_NEAR(back.x, shifted.ground_truth().front().x, 1e-12);
  EXPECT_NEAR(back.y, shifted.ground_truth().front().y, 1e-12);
}

TEST(Simulator, RejectsPathsThroughWalls) {
  const FloorPlan plan = fixture_plan("two_room");
  const Box a = room_box(plan, plan.room("A"));
  const Box b = room_box(plan, plan.room("B"));
  // Straight across the shared wall away from the doorway.
  SimConfig c;
  c.waypoints = {{a.center().x(), a.ymin + 0.3}, {b.center().x(), b.ymin + 0.3}};
  EXPECT_THROW(Simulator(plan, c), InvalidInput);
  EXPECT_THROW(check_path_free(plan, c.waypoints), InvalidInput);
  c.waypoints = {a.center(), b.center()};
  EXPECT_NO_THROW(Simulator(plan, c));
}

TEST(SimConfig, Validation) {
  SimConfig c;
  c.waypoints = {{0, 0}};
  EXPECT_THROW(c.validate(), InvalidInput);
  c.waypoints = {{0, 0}, {1, 0}};
  EXPECT_NO_THROW(c.validate());
  c.sigma_d = -0.1;
  EXPECT_THROW(c.validate(), InvalidInput);
  c.sigma_d = 0.0;
  c.keyframe_spacing = 0.0;
  EXPECT_THROW(c.validate(), InvalidInput);
}
