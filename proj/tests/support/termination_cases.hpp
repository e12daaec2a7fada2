#pragma once

// Constructed snapshots that trigger each termination rule of each sport.
// Every case starts from a real reset snapshot (which must not terminate)
// and applies one targeted mutation.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sportsim/envs.hpp"

namespace cases {

using namespace sportsim;
using envs::Snapshot;
using envs::TerminationReason;
using TR = envs::TerminationReason;

struct TerminationCase {
  std::string env;
  std::string what;
  TR expected;
  std::optional<TR> actual;
};

inline void shift_agent(envs::AgentView& a, const Vec3& delta) {
  for (auto& p : a.body.joint_pos) p += delta;
}

// Moves agent `i` so its root sits at arena-local x-y (z unchanged).
inline void place_root(Snapshot& s, int i, double x, double y) {
  const Vec3 root = s.agents[i].body.root();
  const Vec3 want = s.arena.to_world({x, y, s.local(root).z()});
  shift_agent(s.agents[i], want - root);
}

inline std::vector<TerminationCase> termination_cases() {
  struct Mutation {
    std::string what;
    TR expected;
    std::function<void(Snapshot&, const SportConfig&, const SkeletonSpec&)> apply;
  };
  using Prep = std::function<void(Snapshot&)>;
  // `prep` puts the episode past the sport's earlier deadlines so the time
  // limit is the first rule to fire.
  const auto common = [](std::vector<Mutation> extra, Prep prep = [](Snapshot&) {}) {
    std::vector<Mutation> m = {
        {"fault flag", TR::kSimulationFault, [](Snapshot& s, auto&, auto&) { s.fault = true; }},
        {"root low", TR::kFall,
         [](Snapshot& s, auto&, auto&) { s.agents[0].body.joint_pos[0].z() = 0.1; }},
        {"head on ground", TR::kFall,
         [](Snapshot& s, auto&, const SkeletonSpec& sk) {
           s.agents.back().body.joint_pos[sk.end_effectors.head].z() = 0.05;
         }},
        {"time limit", TR::kTimeLimit,
         [prep](Snapshot& s, const SportConfig& c, auto&) {
           prep(s);
           s.elapsed = c.time_limit;
         }},
    };
    m.insert(m.end(), extra.begin(), extra.end());
    return m;
  };

  const std::vector<std::pair<std::string, std::vector<Mutation>>> table = {
      {"high_jump",
       common({
           {"body on the bar", TR::kBarContact,
            [](Snapshot& s, const SportConfig& c, auto&) {
              s.bar_height = 1.0;
              place_root(s, 0, c.arena.high_jump_bar_x, c.arena.high_jump_bar_y);
              const Vec3 r = s.agents[0].body.root();
              shift_agent(s.agents[0], Vec3(0, 0, 1.0 - r.z()));
            }},
           {"crossed below the bar", TR::kBarNotCleared,
            [](Snapshot& s, auto&, auto&) { s.bar_crossed = true; }},
           {"wandered left", TR::kOffTrack,
            [](Snapshot& s, auto&, auto&) { place_root(s, 0, 5.0, 10.0); }},
           {"ran past the pit", TR::kOffTrack,
            [](Snapshot& s, const SportConfig& c, auto&) {
              place_root(s, 0, c.arena.high_jump_bar_x + 7.5, 6.0);
            }},
           {"cleared and landed", TR::kTaskComplete,
            [](Snapshot& s, const SportConfig& c, auto&) {
              s.bar_crossed = s.bar_cleared = true;
              place_root(s, 0, c.arena.high_jump_bar_x + 1.5, c.arena.high_jump_bar_y);
            }},
       })},
      {"long_jump",
       common({
           {"left the lane", TR::kOffTrack,
            [](Snapshot& s, auto&, auto&) { place_root(s, 0, 5.0, 2.0); }},
           {"foot over the line", TR::kOffTrack,
            [](Snapshot& s, const SportConfig& c, auto&) { place_root(s, 0, c.arena.long_jump_line + 0.5, 0.0); }},
           {"landed", TR::kTaskComplete, [](Snapshot& s, auto&, auto&) { s.landed = true; }},
       })},
      {"hurdling",
       common({
           {"hurdle trip", TR::kFall,
            [](Snapshot& s, const SportConfig& c, auto&) {
              s.hurdle_heights.assign(c.arena.hurdle_count, 1.0);
              place_root(s, 0, c.arena.hurdle_first, 0.0);
            }},
           {"left the lane", TR::kOffTrack,
            [](Snapshot& s, auto&, auto&) { place_root(s, 0, 40.0, 2.0); }},
           {"ran backwards", TR::kOffTrack,
            [](Snapshot& s, auto&, auto&) { place_root(s, 0, -6.0, 0.0); }},
           {"finish", TR::kTaskComplete,
            [](Snapshot& s, const SportConfig& c, auto&) {
              place_root(s, 0, c.arena.track_finish + 0.5, 0.0);
            }},
       })},
      {"golf",
       common({
           {"ball at the feet", TR::kBallTooCloseToBody,
            [](Snapshot& s, auto&, auto&) {
              s.ball.kin.pos = s.agents[0].body.root() + Vec3(0.1, 0, -0.8);
            }},
           {"no contact after 61 steps", TR::kNoContactTimeout,
            [](Snapshot& s, auto&, auto&) {
              s.step = 61;
              s.elapsed = 61 / 30.0;
            }},
           {"ball rolled back", TR::kBallBackward,
            [](Snapshot& s, auto&, auto&) {
              s.agents[0].latched = true;
              s.ball.kin.pos = s.arena.to_world(s.local(s.ball_spawn) + Vec3(-0.2, 0, 0));
            }},
           {"landed", TR::kTaskComplete,
            [](Snapshot& s, auto&, auto&) {
              s.agents[0].latched = true;
              s.landed = true;
            }},
       },
       [](Snapshot& s) { s.agents[0].latched = true; })},
      {"javelin",
       common({
           {"slipped from the hand", TR::kJavelinDetached,
            [](Snapshot& s, auto&, auto&) { s.ball.kin.pos = s.agents[0].wrist + Vec3(0.5, 0, 0); }},
           {"pointing backwards", TR::kJavelinPoseDeviation,
            [](Snapshot& s, auto&, auto&) {
              s.ball.kin.orient = Quat(Eigen::AngleAxisd(kPi, Vec3::UnitZ())) * s.ball.kin.orient;
            }},
           {"held past the deadline", TR::kJavelinNotReleased,
            [](Snapshot& s, const SportConfig& c, auto&) {
              s.elapsed = c.arena.javelin_release_deadline + 1.0 / 30.0;
            }},
           {"released but still at the hand", TR::kJavelinNotReleased,
            [](Snapshot& s, auto&, auto&) {
              s.released = true;
              s.elapsed = 1.3;
              s.ball.kin.pos = s.agents[0].wrist;
            }},
           {"landed", TR::kTaskComplete,
            [](Snapshot& s, auto&, auto&) {
              s.released = true;
              s.ball.kin.pos = s.agents[0].wrist + Vec3(5, 0, 0);
              s.landed = true;
            }},
       },
       [](Snapshot& s) {
         s.released = true;
         s.ball.kin.pos = s.agents[0].wrist + Vec3(5, 0, 0);
       })},
      {"tennis",
       common({{"lost point", TR::kLostPoint, [](Snapshot& s, auto&, auto&) { s.lost_point = true; }}})},
      {"tennis_1v1",
       common({{"lost point", TR::kLostPoint, [](Snapshot& s, auto&, auto&) { s.lost_point = true; }}})},
      {"table_tennis",
       common({{"lost point", TR::kLostPoint, [](Snapshot& s, auto&, auto&) { s.lost_point = true; }}})},
      {"table_tennis_1v1",
       common({{"lost point", TR::kLostPoint, [](Snapshot& s, auto&, auto&) { s.lost_point = true; }}})},
      {"fencing",
       common({
           {"off the piste end", TR::kOutOfBounds,
            [](Snapshot& s, const SportConfig& c, auto&) { place_root(s, 0, 0.5 * c.arena.piste_length + 0.1, 0); }},
           {"off the piste side", TR::kOutOfBounds,
            [](Snapshot& s, const SportConfig& c, auto&) { place_root(s, 1, 0, 0.5 * c.arena.piste_width + 0.1); }},
           {"touch", TR::kPointScored, [](Snapshot& s, auto&, auto&) { s.agents[1].point = true; }},
       })},
      {"boxing",
       common({
           {"out of the ring", TR::kOutOfBounds,
            [](Snapshot& s, const SportConfig& c, auto&) { place_root(s, 1, 0, 0.5 * c.arena.ring_size + 0.1); }},
       })},
      {"penalty_kick",
       common({
           {"goal", TR::kPointScored, [](Snapshot& s, auto&, auto&) { s.goal = true; }},
           {"ball out", TR::kOutOfBounds, [](Snapshot& s, auto&, auto&) { s.ball_out = true; }},
           {"agent off the field", TR::kOutOfBounds,
            [](Snapshot& s, const SportConfig& c, auto&) { place_root(s, 0, 0, 0.5 * c.arena.field_width + 0.1); }},
       })},
      {"soccer_1v1", common({})},
      {"soccer_2v2", common({})},
      {"free_throw",
       common({
           {"basket", TR::kPointScored, [](Snapshot& s, auto&, auto&) { s.basket = true; }},
           {"miss hits the floor", TR::kLostPoint,
            [](Snapshot& s, auto&, auto&) {
              s.released = true;
              s.ball_grounded = true;
            }},
           {"ball out", TR::kOutOfBounds, [](Snapshot& s, auto&, auto&) { s.ball_out = true; }},
           {"agent off the court", TR::kOutOfBounds,
            [](Snapshot& s, const SportConfig& c, auto&) { place_root(s, 0, 0.5 * c.arena.court_b_length + 0.1, 0); }},
       })},
  };

  std::vector<TerminationCase> out;
  for (const auto& [id, mutations] : table) {
    const SportConfig cfg = default_config(id);
    envs::Env env(cfg);
    env.reset(7);
    const Snapshot base = env.snapshot();
    const SkeletonSpec& sk = env.skeleton();
    out.push_back({id, "fresh reset", TR::kNone,
                   envs::check_termination(cfg, sk, base).value_or(TR::kNone)});
    for (const auto& m : mutations) {
      Snapshot s = base;
      m.apply(s, cfg, sk);
      out.push_back({id, m.what, m.expected, envs::check_termination(cfg, sk, s)});
    }
  }
  // Golf timeout boundary: step 60 is exactly 2.0 s and must not fire.
  {
    const SportConfig cfg = default_config("golf");
    envs::Env env(cfg);
    env.reset(7);
    Snapshot s = env.snapshot();
    s.step = 60;
    s.elapsed = 60 / 30.0;
    out.push_back({"golf", "step 60 (2.0 s)", TR::kNone,
                   envs::check_termination(cfg, env.skeleton(), s).value_or(TR::kNone)});
  }
  return out;
}

// Every rule of every sport appears in at least one passing case.
inline std::vector<std::string> uncovered_rules(const std::vector<TerminationCase>& cs) {
  std::vector<std::string> missing;
  for (const auto& id : env_ids()) {
    const Sport sport = default_config(id).sport;
    for (TR rule : envs::termination_rules(sport)) {
      bool hit = false;
      for (const auto& c : cs)
        if (c.expected == rule && c.actual == rule && default_config(c.env).sport == sport) hit = true;
      if (!hit) missing.push_back(id + ":" + envs::to_string(rule));
    }
  }
  return missing;
}

}  // namespace cases
