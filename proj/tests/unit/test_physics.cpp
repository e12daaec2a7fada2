#include <gtest/gtest.h>

#include <random>

#include "../support/oracle.hpp"
#include "sportsim/ballistics.hpp"
#include "sportsim/physics.hpp"

using namespace sportsim;
using namespace sportsim::physics;

namespace {

FreeObject ball(double r, double e, double mu = 0.0) {
  FreeObject o;
  o.spec = {Shape::sphere(r), 0.1, e, mu};
  return o;
}

// Runs until the ball has bounced once and returns the next apex height of
// the ball's lowest point.
double rebound_apex(double drop, double e, double dt) {
  FreeObject o = ball(0.02, e);
  o.kin.pos = {0, 0, drop + 0.02};
  StaticGeometry geo;
  std::array<ObjectContacts, 1> c{};
  bool bounced = false;
  double apex = 0.0;
  for (int i = 0; i < 2000; ++i) {
    step_objects({&o, 1}, dt, geo, c);
    if (c[0].touched(kGroundContact)) bounced = true;
    if (bounced) {
      apex = std::max(apex, o.kin.pos.z() - 0.02);
      if (o.kin.lin_vel.z() < 0 && apex > 0) break;
    }
  }
  return apex;
}

}  // namespace

TEST(StepObjects, ReboundApexFollowsRestitutionSquared) {
  const double apex = rebound_apex(1.0, 0.5, kSimDt);
  EXPECT_NEAR(apex, 0.25, 0.25 * 0.02);
}

TEST(StepObjects, InelasticBallComesToRest) {
  FreeObject o = ball(0.1, 0.0);
  o.kin.pos = {0, 0, 1.0};
  StaticGeometry geo;
  for (int i = 0; i < 120; ++i) step_objects({&o, 1}, kSimDt, geo, {});
  EXPECT_NEAR(o.kin.lin_vel.z(), 0.0, 1e-6);
  EXPECT_NEAR(o.kin.pos.z(), 0.1, 1e-9);
}

TEST(StepObjects, FreeFlightMatchesOracle) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int trial = 0; trial < 50; ++trial) {
    FreeObject o = ball(0.05, 0.5);
    o.kin.pos = {u(rng), u(rng), 50.0};
    o.kin.lin_vel = {u(rng), u(rng), u(rng)};
    const ballistics::LaunchState s{o.kin.pos, o.kin.lin_vel};
    StaticGeometry geo;
    geo.ground = false;
    for (int i = 0; i < 60; ++i) step_objects({&o, 1}, kSimDt, geo, {});
    const auto ref = ballistics::integrate_flight(s, kSimDt, 60);
    EXPECT_LT((o.kin.pos - ref.back().pos).norm(), 1e-3);
  }
}

TEST(StepObjects, NoEnergyGainAcrossContacts) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  StaticGeometry geo;
  geo.boxes.push_back({{0, 0, 0.5}, {1.37, 0.76, 0.02}, 0.0, 0, true});
  for (int trial = 0; trial < 100; ++trial) {
    FreeObject o = ball(0.02, u(rng), 0.5 * u(rng));
    o.kin.pos = {2 * u(rng) - 1, 2 * u(rng) - 1, 0.6 + 2 * u(rng)};
    o.kin.lin_vel = {6 * u(rng) - 3, 6 * u(rng) - 3, -5 * u(rng)};
    double prev = mechanical_energy(o);
    for (int i = 0; i < 240; ++i) {
      step_objects({&o, 1}, kSimDt, geo, {});
      const double now = mechanical_energy(o);
      ASSERT_LE(now, prev + 1e-6 * std::max(1.0, std::abs(prev))) << "trial " << trial << " step " << i;
      prev = now;
    }
  }
}

TEST(StepObjects, BlowupOnDeepPenetration) {
  FreeObject o = ball(0.02, 0.5);
  o.kin.pos = {0, 0, -1.0};
  StaticGeometry geo;
  try {
    step_objects({&o, 1}, kSimDt, geo, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSimulationBlowup);
  }
  EXPECT_THROW(step_objects({&o, 1}, 0.0, geo, {}), Error);
}

TEST(StepObjects, PinnedBallStaysOnTheSurface) {
  // A foot resting on the ball pushes it into the ground every substep.
  for (double e : {0.0, 0.5, 0.8}) {
    FreeObject o = ball(0.11, e, 0.4);
    o.kin.pos = {0, 0, 0.11};
    StaticGeometry geo;
    for (int i = 0; i < 2000; ++i) {
      const KinematicSphere foot{{0, 0, 0.11 + 0.1 + 0.05}, 0.1, {0, 0, -0.3}};
      resolve_contact(o, foot, e, kSimDt);
      step_objects({&o, 1}, kSimDt, geo, {});
      ASSERT_GE(o.kin.pos.z(), 0.11 - 1e-9) << "e " << e << " step " << i;
    }
  }
}

TEST(StepObjects, AttachedObjectsAreSkipped) {
  FreeObject o = ball(0.02, 0.5);
  o.attached = true;
  o.kin.pos = {0, 0, 2.0};
  step_objects({&o, 1}, kSimDt, StaticGeometry{}, {});
  EXPECT_EQ(o.kin.pos.z(), 2.0);
}

TEST(StepObjects, TerrainContactReported) {
  Terrain t;
  FreeObject o = ball(0.02, 0.5);
  o.kin.pos = {1.0, 1.0, t.height(1.0, 1.0) + 0.1};
  StaticGeometry geo;
  geo.terrain = &t;
  std::array<ObjectContacts, 1> c{};
  bool touched = false;
  for (int i = 0; i < 60 && !touched; ++i) {
    step_objects({&o, 1}, kSimDt, geo, c);
    touched = c[0].touched(kTerrainContact);
  }
  EXPECT_TRUE(touched);
  EXPECT_GE(o.kin.pos.z(), t.height(o.kin.pos.x(), o.kin.pos.y()) - 1e-9);
}

TEST(Terrain, AmplitudeBound) {
  Terrain t;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 10000; ++i) EXPECT_LE(std::abs(t.height(u(rng), u(rng))), 0.5 + 1e-12);
  std::vector<float> patch(32 * 32);
  t.sample_patch({0, 0, 0}, 0.3, 0.25, 32, 32, 0.0, patch.data());
  for (float h : patch) EXPECT_LE(std::abs(h), 0.5f + 1e-6f);
}

TEST(KinematicContacts, DisjointAndOverlap) {
  FreeObject o = ball(0.1, 0.5);
  o.kin.pos = {0, 0, 1};
  EXPECT_FALSE(overlaps(o, KinematicSphere{{1, 0, 1}, 0.1, Vec3::Zero()}));
  EXPECT_EQ(resolve_contact(o, KinematicSphere{{1, 0, 1}, 0.1, Vec3::Zero()}, 0.5, kSimDt), 0.0);
  const KinematicBox club{{0.05, 0, 1}, {0.025, 0.0125, 0.01}, 0.0, {-10, 0, 0}};
  EXPECT_TRUE(overlaps(o, club));
  const double f = resolve_contact(o, club, 0.8, kSimDt);
  EXPECT_GT(f, 0.0);
  EXPECT_LT(o.kin.lin_vel.x(), 0.0);
  const KinematicDisc racket{{0, 0, 1.05}, {0, 0, 1}, 0.15, {0, 0, 0}};
  EXPECT_TRUE(overlaps(o, racket));
}

TEST(ProxyBackend, ZeroActionsStayPut) {
  ProxyBackend b(smpl_skeleton(), 1);
  b.place(0, {1, 2, smpl_skeleton().stand_height}, 0.5);
  const Vec3 start = b.state(0).root();
  std::vector<float> a(69, 0.0f);
  for (int i = 0; i < 60; ++i) b.step(a, kSubsteps, kSimDt);
  EXPECT_LT((b.state(0).root() - start).norm(), 1e-9);
  EXPECT_TRUE(b.grounded(0));
}

TEST(ProxyBackend, ActuationNeverExceedsCap) {
  ProxyBackend b(smpl_skeleton(), 2);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<float> u(-1, 1);
  std::vector<float> a(2 * 69);
  double seen = 0.0;
  for (int i = 0; i < 300; ++i) {
    for (auto& x : a) x = u(rng);
    b.step(a, kSubsteps, kSimDt);
    seen = std::max(seen, b.max_applied_actuation());
    ASSERT_LE(b.max_applied_actuation(), kActuationCap);
  }
  // Full-scale random demands do reach the cap.
  EXPECT_EQ(seen, kActuationCap);
}

TEST(ProxyBackend, DeterministicAcrossInstances) {
  ProxyBackend a(smplx_skeleton(), 1), b(smplx_skeleton(), 1);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<float> u(-1, 1);
  std::vector<float> act(153);
  for (int i = 0; i < 100; ++i) {
    for (auto& x : act) x = u(rng);
    a.step(act, kSubsteps, kSimDt);
    b.step(act, kSubsteps, kSimDt);
  }
  std::vector<float> fa(52 * 15), fb(52 * 15);
  a.state(0).flatten(fa.data());
  b.state(0).flatten(fb.data());
  EXPECT_EQ(fa, fb);
}

TEST(ProxyBackend, StateStaysValid) {
  ProxyBackend b(smpl_skeleton(), 1);
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<float> u(-1, 1);
  std::vector<float> a(69);
  for (int i = 0; i < 300; ++i) {
    for (auto& x : a) x = u(rng);
    b.step(a, kSubsteps, kSimDt);
    EXPECT_NO_THROW(b.state(0).validate(24));
    EXPECT_GE(b.state(0).root().z(), b.params().min_root_height - 1e-12);
  }
}

TEST(Stepping, TwoSubstepsPerControlStep) {
  EXPECT_EQ(kSubsteps, 2);
  EXPECT_DOUBLE_EQ(kPolicyDt / kSimDt, 2.0);
}

TEST(ValidateActions, ShapeAndFiniteness) {
  std::vector<float> a(69, 0.0f);
  EXPECT_NO_THROW(validate_actions(a, 1, 69));
  EXPECT_THROW(validate_actions(a, 2, 69), Error);
  a[5] = NAN;
  try {
    validate_actions(a, 1, 69);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidAction);
  }
}

TEST(ObjectSpec, Validation) {
  ObjectSpec s{Shape::sphere(0.1), 1.0, 1.2, 0.3};
  EXPECT_THROW(s.validate(), Error);
  s.restitution = 0.5;
  s.mass = 0.0;
  EXPECT_THROW(s.validate(), Error);
  s.mass = 1.0;
  EXPECT_NO_THROW(s.validate());
}
