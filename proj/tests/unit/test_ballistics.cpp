#include <gtest/gtest.h>

#include <random>

#include "../support/oracle.hpp"
#include "sportsim/ballistics.hpp"
#include "sportsim/error.hpp"

using namespace sportsim;
using namespace sportsim::ballistics;

TEST(PredictLandGround, HorizontalLaunchFromOneMetre) {
  const Vec2 l = predict_land_ground({{0, 0, 1}, {10, 0, 0}});
  const auto ref = oracle::rk4_cross({0, 0, 1}, {10, 0, 0}, 0.0);
  ASSERT_TRUE(ref);
  EXPECT_NEAR(l.x(), (*ref)[0], 1e-3);
  EXPECT_NEAR(l.x(), 4.5152, 1e-3);
  EXPECT_EQ(l.y(), 0.0);
}

TEST(PredictLandGround, ZeroFlightTime) {
  const Vec2 l = predict_land_ground({{3, 2, 0}, {0, 0, 0}});
  EXPECT_EQ(l, Vec2(3, 2));
}

TEST(PredictLandGround, SymmetricParabola) {
  const double v = 7.0, w = 4.0;
  const Vec2 l = predict_land_ground({{0, 0, 0}, {v, 0, w}});
  EXPECT_NEAR(l.x(), 2 * v * w / kGravity, 1e-12);
}

TEST(PredictLandGround, Errors) {
  EXPECT_THROW(predict_land_ground({{0, 0, -0.1}, {1, 0, 0}}), Error);
  try {
    predict_land_ground({{0, 0, -0.1}, {1, 0, 0}});
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDomain);
  }
  try {
    predict_land_ground({{0, 0, NAN}, {1, 0, 0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidState);
  }
}

TEST(PredictLandHeight, TableHeightExample) {
  const Vec2 l = predict_land_height({{0, 0, 1.0}, {2, 0, 0}}, 0.76);
  const double t = std::sqrt(2 * 0.24 / kGravity);
  EXPECT_NEAR(t, 0.2212, 1e-4);
  EXPECT_NEAR(l.x(), 2 * t, 1e-12);
  const auto ref = oracle::rk4_cross({0, 0, 1}, {2, 0, 0}, 0.76);
  EXPECT_NEAR(l.x(), (*ref)[0], 1e-3);
  EXPECT_NEAR(l.x(), 0.4424, 1e-3);
}

TEST(PredictLandHeight, LaterCrossingFromThePlane) {
  const double vz = 3.0;
  EXPECT_NEAR(time_to_height({{0, 0, 0.76}, {0, 0, vz}}, 0.76), 2 * vz / kGravity, 1e-12);
}

TEST(PredictLandHeight, ApexBelowPlaneHasNoSolution) {
  try {
    predict_land_height({{0, 0, 0.5}, {1, 0, 0}}, 0.76);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoSolution);
  }
}

TEST(PredictLandHeight, ZeroHeightEqualsGround) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-20, 20), z(0, 3);
  for (int i = 0; i < 1000; ++i) {
    const LaunchState s{{u(rng), u(rng), z(rng)}, {u(rng), u(rng), u(rng)}};
    EXPECT_EQ(predict_land_height(s, 0.0), predict_land_ground(s));
  }
}

TEST(PredictLandGround, EquivariantUnderPlanarMotions) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-10, 10), z(0, 3);
  for (int i = 0; i < 500; ++i) {
    const LaunchState s{{u(rng), u(rng), z(rng)}, {u(rng), u(rng), u(rng)}};
    const PlanarFrame f{0.3 * u(rng), {u(rng), u(rng)}};
    const Vec2 a = predict_land_ground(s);
    const Vec2 b = predict_land_ground({f.to_world(s.p0), f.dir_to_world(s.v0)});
    const Vec3 expect = f.to_world({a.x(), a.y(), 0});
    EXPECT_NEAR(b.x(), expect.x(), 1e-9);
    EXPECT_NEAR(b.y(), expect.y(), 1e-9);
  }
}

TEST(DesiredThrowVelocity, FreeThrowExample) {
  const Vec3 ball(4.5, 0, 2), hoop(0, 0, 3);
  const double t = desired_flight_time(ball, hoop);
  EXPECT_NEAR(t, 0.4515, 1e-3);
  const Vec3 v = desired_throw_velocity(ball, hoop);
  EXPECT_NEAR(std::hypot(v.x(), v.y()), 9.967, 1e-3);
  EXPECT_LT(v.x(), 0.0);
  const auto path = integrate_flight({ball, v}, t / 200, 200);
  EXPECT_LT((path.back().pos - hoop).norm(), 1e-3);
}

TEST(DesiredThrowVelocity, GoalDirectlyAbove) {
  const Vec3 v = desired_throw_velocity({0, 0, 0}, {0, 0, 1});
  EXPECT_EQ(v.x(), 0.0);
  EXPECT_EQ(v.y(), 0.0);
  // Apex reached exactly at the goal: v_z^2 = 2 g h.
  EXPECT_NEAR(v.z() * v.z(), 2 * kGravity * 1.0, 1e-9);
}

TEST(DesiredThrowVelocity, LevelGoalPassesThrough) {
  const Vec3 ball(1, 1, 1), goal(6, 1, 1);
  const Vec3 v = desired_throw_velocity(ball, goal);
  const double t = desired_flight_time(ball, goal);
  const auto path = integrate_flight({ball, v}, t / 100, 100);
  EXPECT_LT((path.back().pos - goal).norm(), 1e-6);
}

TEST(DesiredThrowVelocity, Degenerate) {
  try {
    desired_throw_velocity({1, 2, 3}, {1, 2, 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateTarget);
  }
}

TEST(DesiredThrowVelocity, LiteralModeDiffers) {
  // The literal variant cancels the vertical term for a goal 1 m above.
  const Vec3 v = desired_throw_velocity({0, 0, 0}, {3, 0, 1}, kGravity, ThrowVelocityMode::kLiteral);
  EXPECT_NEAR(v.z(), 0.0, 1e-12);
}

TEST(DesiredThrowVelocity, RandomPairsPassThroughGoal) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> dz(-2, 2), dxy(-7, 7);
  for (int i = 0; i < 500; ++i) {
    const Vec3 ball(dxy(rng), dxy(rng), 2.0);
    const Vec3 goal = ball + Vec3(dxy(rng), dxy(rng), dz(rng));
    if ((goal - ball).norm() < 1e-3) continue;
    const Vec3 v = desired_throw_velocity(ball, goal);
    const double t = desired_flight_time(ball, goal);
    const auto path = integrate_flight({ball, v}, t / 64, 64);
    EXPECT_LT((path.back().pos - goal).norm(), 1e-6);
  }
}

TEST(IntegrateFlight, FreeFallClosedForm) {
  const auto path = integrate_flight({{0, 0, 5}, {0, 0, 0}}, 0.01, 100);
  ASSERT_EQ(path.size(), 101u);
  for (const auto& s : path) EXPECT_NEAR(s.pos.z(), 5 - 0.5 * kGravity * s.t * s.t, 1e-9);
}

TEST(IntegrateFlight, EnergyConserved) {
  const auto path = integrate_flight({{0, 0, 1}, {3, -2, 8}}, 1e-3, 1000);
  auto energy = [](const FlightSample& s) { return 0.5 * s.vel.squaredNorm() + kGravity * s.pos.z(); };
  for (const auto& s : path) EXPECT_NEAR(energy(s), energy(path.front()), 1e-6);
}

TEST(IntegrateFlight, RejectsBadStep) {
  EXPECT_THROW(integrate_flight({}, 0.0, 10), Error);
  EXPECT_THROW(integrate_flight({}, 0.1, 0), Error);
}
