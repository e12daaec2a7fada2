#include "sportsim/policies.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sportsim::policies {

namespace {

using envs::Env;

float clampf(double v) { return static_cast<float>(std::clamp(v, -1.0, 1.0)); }

// Channel offsets resolved once per skeleton.
struct Channels {
  int planar, yaw, grip, left_hand, right_hand;

  explicit Channels(const SkeletonSpec& sk)
      : planar(channel(sk.require("L_Hip"))),
        yaw(channel(sk.require("R_Hip"))),
        grip(sk.grip_joint >= 1 ? channel(sk.grip_joint) : -1),
        left_hand(channel(sk.end_effectors.left_hand)),
        right_hand(channel(sk.end_effectors.right_hand)) {}
};

// Runs toward `goal` (world x-y) at `speed` in [0, 1] of the top speed.
void steer(const Channels& c, const envs::AgentView& v, const Vec2& goal, double speed, float* a) {
  const Vec2 d = goal - xy(v.body.root());
  const double want = std::atan2(d.y(), d.x());
  a[c.yaw] = clampf(1.5 * wrap_angle(want - v.heading));
  a[c.planar] = clampf(speed);
}

class ZeroPolicy final : public Policy {
 public:
  std::string_view name() const override { return "zero"; }
  void act(const Env& env, std::uint64_t, float* out) const override {
    std::fill(out, out + env.agents() * env.action_dim(), 0.0f);
  }
};

class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : seed_(seed) {}
  std::string_view name() const override { return "random"; }
  // Stateless: the action depends only on (seed, trial, agent, step, channel),
  // so it is the same whichever slot or worker runs the trial.
  void act(const Env& env, std::uint64_t trial, float* out) const override {
    const int dim = env.action_dim();
    const std::uint64_t episode = derive_seed(seed_, trial);
    const auto step = static_cast<std::uint64_t>(env.snapshot().step);
    for (int a = 0; a < env.agents(); ++a) {
      const std::uint64_t base = derive_seed(episode, (static_cast<std::uint64_t>(a) << 32) | step);
      for (int k = 0; k < dim; ++k)
        out[a * dim + k] = static_cast<float>(hashed_signed_unit(base + static_cast<std::uint64_t>(k)));
    }
  }

 private:
  std::uint64_t seed_;
};

class StraightRunner final : public Policy {
 public:
  std::string_view name() const override { return "straight_runner"; }
  void act(const Env& env, std::uint64_t, float* out) const override {
    const int dim = env.action_dim();
    std::fill(out, out + env.agents() * dim, 0.0f);
    const Channels c(env.skeleton());
    const auto& snap = env.snapshot();
    for (int a = 0; a < env.agents(); ++a) {
      const envs::AgentView& v = snap.agents[a];
      float* act = out + a * dim;
      const Vec3 goal = snap.targets[a];
      steer(c, v, xy(goal), 1.0, act);
      const double x = snap.local(v.body.root()).x();
      // Take-off points for the jumps.
      if (snap.sport == Sport::kLongJump && x > 17.8 && x < 19.0) act[c.planar + 2] = 1.0f;
      if (snap.sport == Sport::kHighJump && x > 13.5 && x < 15.0) act[c.planar + 2] = 1.0f;
    }
  }
};

class BallChaser final : public Policy {
 public:
  std::string_view name() const override { return "ball_chaser"; }
  void act(const Env& env, std::uint64_t, float* out) const override {
    const int dim = env.action_dim();
    std::fill(out, out + env.agents() * dim, 0.0f);
    const auto& snap = env.snapshot();
    if (!snap.has_ball) return;
    const Channels c(env.skeleton());
    const Vec2 ball = xy(snap.ball.kin.pos);
    for (int a = 0; a < env.agents(); ++a) {
      const envs::AgentView& v = snap.agents[a];
      Vec2 goal = xy(snap.targets[a]);
      if (snap.sport == Sport::kSoccer) goal = xy(snap.arena.to_world(envs::goal_center(env.config(), v.team)));
      Vec2 dir = goal - ball;
      if (dir.norm() > 0.0) dir.normalize();
      // Approach from behind the ball, then run through it.
      const Vec2 behind = ball - 0.4 * dir;
      const double gap = (xy(v.body.root()) - behind).norm();
      steer(c, v, gap > 0.3 ? behind : ball + dir, gap > 2.0 ? 1.0 : 0.6, out + a * dim);
    }
  }
};

class FixedSwing final : public Policy {
 public:
  std::string_view name() const override { return "fixed_swing"; }
  void act(const Env& env, std::uint64_t, float* out) const override {
    const int dim = env.action_dim();
    std::fill(out, out + env.agents() * dim, 0.0f);
    const auto& snap = env.snapshot();
    const Channels c(env.skeleton());
    const double t = snap.elapsed;
    const double phase = std::sin(2.0 * kPi * t / 1.5);
    for (int a = 0; a < env.agents(); ++a) {
      const envs::AgentView& v = snap.agents[a];
      float* act = out + a * dim;
      switch (snap.sport) {
        case Sport::kGolf:
          // Sweep the club across the ball toward the target side.
          act[c.right_hand + 1] = clampf(phase);
          break;
        case Sport::kTennis:
        case Sport::kTableTennis: {
          // Shuffle sideways to line the racket up with the ball.
          if (snap.has_ball) {
            const Vec3 rel = rotate_z(snap.ball.kin.pos - v.implement, -v.heading);
            act[c.planar + 1] = clampf(0.5 * rel.y());
          }
          act[c.right_hand] = clampf(phase);
          break;
        }
        case Sport::kFencing:
        case Sport::kBoxing: {
          const envs::AgentView& opp = snap.agents[1 - a];
          const double gap = (xy(opp.body.root()) - xy(v.body.root())).norm();
          steer(c, v, xy(opp.body.root()), gap > 1.2 ? 0.3 : 0.0, act);
          act[c.right_hand] = clampf(phase);
          act[c.right_hand + 2] = 0.5f;
          break;
        }
        default:
          act[c.right_hand] = clampf(phase);
          break;
      }
    }
  }
};

class Thrower final : public Policy {
 public:
  std::string_view name() const override { return "thrower"; }
  void act(const Env& env, std::uint64_t, float* out) const override {
    const int dim = env.action_dim();
    std::fill(out, out + env.agents() * dim, 0.0f);
    const auto& snap = env.snapshot();
    const Channels c(env.skeleton());
    const double t = snap.elapsed;
    float* act = out;
    if (snap.sport == Sport::kJavelin) {
      // Run-up, then a forward arm drive with the grip opening at the top.
      act[c.planar] = t < 1.0 ? 0.8f : 0.0f;
      if (t >= 0.9) {
        act[c.right_hand] = 1.0f;
        act[c.right_hand + 2] = 1.0f;
      }
      if (c.grip >= 0) act[c.grip] = t < 1.1 ? 1.0f : -1.0f;
    } else {
      // Both hands drive up and forward; release near full extension.
      for (int h : {c.left_hand, c.right_hand}) {
        act[h] = 1.0f;
        act[h + 2] = 1.0f;
      }
      if (c.grip >= 0) act[c.grip] = t < 0.4 ? 1.0f : -1.0f;
    }
  }
};

}  // namespace

const std::vector<std::string_view>& policy_names() {
  static const std::vector<std::string_view> names = {
      "zero", "random", "straight_runner", "ball_chaser", "fixed_swing", "thrower"};
  return names;
}

std::unique_ptr<Policy> make_policy(std::string_view name, std::uint64_t seed) {
  if (name == "zero") return std::make_unique<ZeroPolicy>();
  if (name == "random") return std::make_unique<RandomPolicy>(seed);
  if (name == "straight_runner") return std::make_unique<StraightRunner>();
  if (name == "ball_chaser") return std::make_unique<BallChaser>();
  if (name == "fixed_swing") return std::make_unique<FixedSwing>();
  if (name == "thrower") return std::make_unique<Thrower>();
  throw Error(ErrorCode::kConfiguration, "unknown policy '" + std::string(name) + "'");
}

}  // namespace sportsim::policies
