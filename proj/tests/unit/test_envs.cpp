#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>

#include "expect_code.hpp"
#include "sportsim/envs.hpp"
#include "sportsim/harness.hpp"
#include "sportsim/policies.hpp"

namespace {

using namespace sportsim;
using envs::Env;

std::vector<float> obs_of(const Env& env) {
  std::vector<float> o(env.agents() * env.obs_dim());
  env.observe(o.data());
  return o;
}

// Random actions in [-1, 1] from a fixed stream.
std::vector<float> random_actions(const Env& env, Rng& rng) {
  std::vector<float> a(env.agents() * env.action_dim());
  for (float& x : a) x = static_cast<float>(rng.uniform(-1.0, 1.0));
  return a;
}

TEST(Envs, ObservationDimensions) {
  const int prop = 24 * BodyState::kValuesPerJoint;
  Env fencing(default_config("fencing"));
  EXPECT_EQ(fencing.goal_dim(), 211);
  EXPECT_EQ(fencing.prop_dim(), prop);
  EXPECT_EQ(fencing.action_dim(), 69);
  Env kick(default_config("penalty_kick"));
  EXPECT_EQ(kick.goal_dim(), 16);
  Env golf(default_config("golf"));
  EXPECT_EQ(golf.goal_dim(), 9 + 32 * 32);
  for (const auto& id : env_ids()) {
    Env env(default_config(id));
    EXPECT_EQ(env.obs_dim(), env.prop_dim() + env.goal_dim()) << id;
    EXPECT_TRUE(std::isfinite(env.obs_dim()));
    const auto o = obs_of(env);
    for (float v : o) ASSERT_TRUE(std::isfinite(v)) << id;
  }
}

TEST(Envs, PenaltyKickSpawn) {
  const SportConfig cfg = default_config("penalty_kick");
  Env env(cfg);
  env.reset(4);
  const auto& s = env.snapshot();
  const double goal_x = envs::goal_center(cfg, 0).x();
  EXPECT_NEAR(goal_x - s.local(s.agents[0].body.root()).x(), 13.0, 1e-9);
  EXPECT_NEAR(goal_x - s.local(s.ball.kin.pos).x(), 12.0, 1e-9);
  EXPECT_NEAR(s.local(s.ball.kin.pos).y(), 0.0, 1e-12);
}

TEST(Envs, HighJumpBarComesFromTheLadder) {
  Env env(default_config("high_jump"));
  std::set<double> levels;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    env.reset(seed);
    levels.insert(env.snapshot().bar_height);
  }
  EXPECT_EQ(levels, (std::set<double>{0.5, 1.0, 1.5, 2.0}));
}

TEST(Envs, HurdleHeightsAreSampledPerHurdle) {
  Env env(default_config("hurdling"));
  env.reset(11);
  const auto& h = env.snapshot().hurdle_heights;
  ASSERT_EQ(h.size(), 10u);
  std::set<double> distinct(h.begin(), h.end());
  EXPECT_GT(distinct.size(), 1u);
  for (double v : h) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.167);
  }
}

TEST(Envs, HurdleObservationListsPositions) {
  const SportConfig cfg = default_config("hurdling");
  Env env(cfg);
  env.reset(2);
  const auto o = obs_of(env);
  // Agent starts at the origin facing +x, so the heading-frame hurdle x
  // coordinates are the track positions relative to the root.
  const double root_x = env.snapshot().agents[0].body.root().x();
  for (int k = 0; k < 10; ++k) {
    const float x = o[env.prop_dim() + 3 * k];
    EXPECT_NEAR(x, 13.72 + 9.14 * k - root_x, 1e-4) << k;
  }
  EXPECT_NEAR(o[env.prop_dim() + 30], 110.0 - root_x, 1e-4);
}

TEST(Envs, SameSeedSameTrajectory) {
  for (const auto& id : env_ids()) {
    Env a(default_config(id)), b(default_config(id));
    a.reset(21);
    b.reset(21);
    Rng ra(3), rb(3);
    for (int t = 0; t < 40 && !a.done(); ++t) {
      a.step(random_actions(a, ra));
      b.step(random_actions(b, rb));
      ASSERT_EQ(obs_of(a), obs_of(b)) << id << " step " << t;
      ASSERT_EQ(a.reward(0).total(), b.reward(0).total()) << id;
    }
    EXPECT_EQ(a.reason(), b.reason()) << id;
  }
}

TEST(Envs, ResetIsRepeatable) {
  Env env(default_config("golf"));
  env.reset(5);
  const auto first = obs_of(env);
  Rng rng(1);
  for (int t = 0; t < 10; ++t) env.step(random_actions(env, rng));
  env.reset(5);
  EXPECT_EQ(obs_of(env), first);
  env.reset(6);
  EXPECT_NE(obs_of(env), first);
}

TEST(Envs, ObservationsInvariantToArenaPlacement) {
  const PlanarFrame moved{1.1, Vec2(35.0, -12.5)};
  for (const auto& id : env_ids()) {
    Env a(default_config(id)), b(default_config(id));
    b.set_arena(moved);
    a.reset(8);
    b.reset(8);
    Rng ra(2), rb(2);
    for (int t = 0; t < 15; ++t) {
      const auto oa = obs_of(a), ob = obs_of(b);
      ASSERT_EQ(oa.size(), ob.size());
      for (size_t i = 0; i < oa.size(); ++i)
        ASSERT_NEAR(oa[i], ob[i], 2e-3) << id << " step " << t << " index " << i;
      for (int ag = 0; ag < a.agents(); ++ag)
        ASSERT_NEAR(a.reward(ag).total(), b.reward(ag).total(), 2e-3) << id << " step " << t;
      if (a.done() || b.done()) {
        EXPECT_EQ(a.reason(), b.reason()) << id;
        break;
      }
      a.step(random_actions(a, ra));
      b.step(random_actions(b, rb));
    }
  }
}

TEST(Envs, WrongActionLengthThrows) {
  Env env(default_config("boxing"));
  env.reset(1);
  std::vector<float> short_block(env.action_dim());
  EXPECT_CODE(env.step(short_block), ErrorCode::kInvalidAction);
  EXPECT_FALSE(env.done());
}

TEST(Envs, NonFiniteActionFaultsTheEpisode) {
  Env env(default_config("long_jump"));
  env.reset(1);
  std::vector<float> a(env.action_dim(), 0.0f);
  a[5] = std::numeric_limits<float>::quiet_NaN();
  env.step(a);
  EXPECT_TRUE(env.done());
  EXPECT_EQ(env.reason(), envs::TerminationReason::kSimulationFault);
  EXPECT_FALSE(env.summary().success);
}

TEST(Envs, RandomPlayStaysHealthyWithoutAllocating) {
  for (const auto& id : env_ids()) {
    Env env(default_config(id));
    Rng rng(11);
    std::vector<float> a(env.agents() * env.action_dim());
    std::uint64_t allocs = 0;
    for (int ep = 0; ep < 4; ++ep) {
      env.reset(100 + ep);
      while (!env.done()) {
        for (float& x : a) x = static_cast<float>(rng.uniform(-1.0, 1.0));
        const auto before = harness::allocation_count();
        env.step(a);
        allocs += harness::allocation_count() - before;
      }
      EXPECT_NE(env.reason(), envs::TerminationReason::kSimulationFault) << id << " ep " << ep;
    }
    EXPECT_EQ(allocs, 0u) << id;
  }
}

TEST(Envs, ImplementOffsetIsRigid) {
  // Racket and sword stay at a fixed offset from the wrist in the hand frame.
  for (const char* id : {"tennis", "table_tennis", "fencing"}) {
    Env env(default_config(id));
    env.reset(3);
    Rng rng(4);
    std::optional<double> offset;
    for (int t = 0; t < 20 && !env.done(); ++t) {
      const auto& a = env.snapshot().agents[0];
      const double d = (a.implement - a.wrist).norm();
      if (offset) ASSERT_NEAR(d, *offset, 1e-9) << id;
      offset = d;
      env.step(random_actions(env, rng));
    }
  }
}

TEST(Envs, MultiAgentScoresStayConsistent) {
  for (const char* id : {"tennis_1v1", "table_tennis_1v1", "soccer_1v1", "fencing", "boxing"}) {
    Env env(default_config(id));
    env.reset(12);
    Rng rng(12);
    int prev_total = 0;
    for (int t = 0; t < 300 && !env.done(); ++t) {
      env.step(random_actions(env, rng));
      const auto& m = env.match();
      const int total = m.score[0] + m.score[1];
      EXPECT_GE(m.score[0], 0);
      EXPECT_GE(m.score[1], 0);
      EXPECT_GE(total, prev_total) << id;
      EXPECT_LE(total - prev_total, 1) << id;
      prev_total = total;
    }
  }
}

TEST(Envs, SummaryMatchesTermination) {
  auto zero = policies::make_policy("zero");
  for (const auto& id : env_ids()) {
    SportConfig cfg = default_config(id);
    cfg.time_limit = 2.0;
    Env env(cfg);
    env.reset(0);
    std::vector<float> a(env.agents() * env.action_dim());
    int steps = 0;
    while (!env.done()) {
      zero->act(env, 0, a.data());
      env.step(a);
      ++steps;
    }
    EXPECT_EQ(env.summary().steps, steps) << id;
    EXPECT_EQ(env.summary().reason, env.reason()) << id;
    EXPECT_LE(steps, 61) << id;
  }
}

TEST(Envs, CardListsEveryRule) {
  for (const auto& id : env_ids()) {
    const SportConfig cfg = default_config(id);
    const std::string card = envs::environment_card(cfg);
    for (auto r : envs::termination_rules(cfg.sport))
      EXPECT_NE(card.find(envs::to_string(r)), std::string::npos) << id << " " << envs::to_string(r);
  }
}

}  // namespace
