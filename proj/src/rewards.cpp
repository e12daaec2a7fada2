#include "sportsim/rewards.hpp"

#include <cmath>
#include <string>

#include "sportsim/error.hpp"

namespace sportsim::rewards {

namespace {

constexpr KernelInfo kKernels[] = {
    {"high_jump", 2, {"p", "h"}, {1.0, 1.0}},
    {"long_jump", 4, {"p", "v", "h", "l"}, {1.0, 0.01, 0.1, 30.0}},
    {"hurdling", 1, {"distance"}, {1.0}},
    {"golf", 4, {"p", "c", "g", "pred"}, {1.0, 1.0, 1.0, 1.0}},
    {"javelin",
     7,
     {"grab_hold", "js_hold", "goal_throw", "s_throw", "grab_throw", "goal_fly", "js_fly"},
     {0.9, 0.1, 0.9, 0.05, -0.05, 0.9, 0.1}},
    {"tennis", 2, {"racket", "ball"}, {1.0, 1.0}},
    {"table_tennis", 2, {"racket", "ball"}, {1.0, 1.0}},
    {"fencing", 4, {"facing", "vel", "strike", "point"}, {0.1, 0.1, 0.6, 1.0}},
    {"boxing", 4, {"facing", "vel", "strike", "point"}, {0.1, 0.1, 0.6, 1.0}},
    {"penalty_kick", 5, {"p2b", "b2g", "bv2g", "b2t", "no_dribble"}, {0.4, 0.1, 0.1, 0.8, 1.0}},
    {"soccer_match", 4, {"p2b", "b2g", "bv2g", "point"}, {0.4, 0.1, 0.1, 100.0}},
    {"free_throw", 3, {"ballvel", "bv2g", "basket"}, {0.5, 0.5, 1.0}},
};

double land_falloff(const Vec2& land, const Vec2& target, double k) {
  return std::exp(-k * (land - target).squaredNorm());
}

void combat(const CombatInput& in, const Weights& w, RewardBreakdown* out) {
  const Vec2 to_opp = xy(in.opp_root) - xy(in.root);
  const double dist = to_opp.norm();
  double facing = 0.0;
  if (dist > 0.0) {
    const Vec2 heading(std::cos(in.heading), std::sin(in.heading));
    facing = clamp01(heading.dot(to_opp / dist));
  }
  const double vel = velocity_alignment(xy(in.root_vel), to_opp);
  double best = (in.striker - in.targets[0]).squaredNorm();
  for (int i = 1; i < kCombatTargets; ++i)
    best = std::min(best, (in.striker - in.targets[i]).squaredNorm());
  out->clear();
  out->add("facing", facing, w[0]);
  out->add("vel", vel, w[1]);
  out->add("strike", std::exp(-10.0 * best), w[2]);
  out->add("point", in.point ? 1.0 : 0.0, w[3]);
  out->finalize();
}

void racket(const RacketInput& in, const Weights& w, bool table, RewardBreakdown* out) {
  const double r_racket = std::exp(-(in.racket - in.ball).squaredNorm());
  double land = 0.0;
  if (table) {
    if (const auto l = ballistics::try_land_height({in.ball, in.ball_vel}, kTableHeight))
      land = land_falloff(*l, in.target, 1.0);
  } else {
    const Vec3 p0(in.ball.x(), in.ball.y(), std::max(in.ball.z(), 0.0));
    land = land_falloff(ballistics::predict_land_ground({p0, in.ball_vel}), in.target, 1.0);
  }
  const double r_ball = 1.0 + land + (table ? static_cast<double>(in.hits) : 0.0);
  out->clear();
  out->branch = in.contact_latched ? 1 : 0;
  out->add("racket", r_racket, in.contact_latched ? 0.0 : w[0]);
  out->add("ball", r_ball, in.contact_latched ? w[1] : 0.0);
  out->finalize();
}

}  // namespace

double RewardBreakdown::value(std::string_view name) const {
  for (int i = 0; i < count_; ++i)
    if (terms_[i].name == name) return terms_[i].value;
  throw Error(ErrorCode::kConfiguration, "no reward term '" + std::string(name) + "'");
}

double RewardBreakdown::weight(std::string_view name) const {
  for (int i = 0; i < count_; ++i)
    if (terms_[i].name == name) return terms_[i].weight;
  throw Error(ErrorCode::kConfiguration, "no reward term '" + std::string(name) + "'");
}

const KernelInfo& kernel_info(Kernel k) { return kKernels[static_cast<int>(k)]; }

int weight_slot(Kernel k, std::string_view name) {
  const KernelInfo& info = kernel_info(k);
  for (int i = 0; i < info.weight_count; ++i)
    if (info.weight_names[i] == name) return i;
  return -1;
}

double velocity_alignment(const Vec2& vel, const Vec2& dir) {
  const double n = dir.norm();
  if (!(n > 0.0)) return 0.0;
  return clamp01(vel.dot(dir / n) / kSpeedScale);
}

double progress(const Vec3& prev, const Vec3& cur, const Vec3& goal) {
  return (prev - goal).norm() - (cur - goal).norm();
}

void high_jump(const TrackInput& in, const Weights& w, RewardBreakdown* out) {
  const double x = in.root.x();
  const bool window = x > 19.5 && x < 20.5;
  out->clear();
  out->branch = x <= 19.5 ? 0 : (window ? 1 : 2);
  out->add("p", clamp01(progress(in.prev_root, in.root, in.goal)), w[0]);
  out->add("h", in.root.z(), window ? w[1] : 0.0);
  out->finalize();
}

void long_jump(const TrackInput& in, const Weights& w, RewardBreakdown* out) {
  const double x = in.root.x();
  const bool past = x > 20.0;
  out->clear();
  out->branch = past ? 1 : 0;
  out->add("p", clamp01(progress(in.prev_root, in.root, in.goal)), w[0]);
  out->add("v", in.root_vel.x(), w[1]);
  out->add("h", in.root.z(), past ? w[2] : 0.0);
  out->add("l", x - 20.0, past ? w[3] : 0.0);
  out->finalize();
}

void hurdling(const TrackInput& in, const Weights& w, RewardBreakdown* out) {
  out->clear();
  out->add("distance", clamp01(progress(in.prev_root, in.root, in.goal)), w[0]);
  out->finalize();
}

void golf(const GolfInput& in, const Weights& w, RewardBreakdown* out) {
  const Vec3 p0(in.ball.x(), in.ball.y(), std::max(in.ball.z() - in.ground_z, 0.0));
  const Vec2 land = ballistics::predict_land_ground({p0, in.ball_vel});
  const Vec2 ref = in.mode == GolfPredictionMode::kToTarget ? xy(in.target) : xy(in.ball);
  out->clear();
  out->branch = in.contact_latched ? 1 : 0;
  out->add("p", clamp01(progress(in.prev_ball, in.ball, in.target)), w[0]);
  out->add("c", in.contact_latched ? 1.0 : std::exp(-100.0 * (in.ball - in.club).squaredNorm()),
           w[1]);
  out->add("g", land_falloff(xy(in.ball), xy(in.target), 0.1), w[2]);
  out->add("pred", land_falloff(land, ref, 0.1), w[3]);
  out->finalize();
}

Rot6 javelin_default_pose(double forward_yaw) {
  const Mat3 pitch = Eigen::AngleAxisd(-kJavelinTilt, Vec3::UnitY()).toRotationMatrix();
  return rot6_from_matrix(yaw_matrix(forward_yaw) * pitch);
}

void javelin(const JavelinInput& in, const Weights& w, RewardBreakdown* out) {
  if (!(in.t >= 0.0)) throw Error(ErrorCode::kDomain, "javelin stage time must be >= 0");
  const double grab = std::exp(-(in.hand - in.javelin).squaredNorm());
  const Rot6 pose = rot6_from_matrix(in.javelin_orient.toRotationMatrix());
  const Rot6 ref = javelin_default_pose(in.forward_yaw);
  double d2 = 0.0;
  for (int i = 0; i < 6; ++i) d2 += sq(pose[i] - ref[i]);
  const double js = std::exp(-d2);
  const Vec2 fwd(std::cos(in.forward_yaw), std::sin(in.forward_yaw));
  const double goal = clamp01(fwd.dot(xy(in.javelin) - xy(in.prev_javelin)));
  const double s = std::exp(-(in.root - in.root_start).squaredNorm());
  out->clear();
  if (in.t < 0.6) {
    out->branch = 0;
    out->add("grab", grab, w[0]);
    out->add("js", js, w[1]);
    out->add("goal", goal, 0.0);
    out->add("s", s, 0.0);
  } else if (in.t < 1.2) {
    out->branch = 1;
    out->add("grab", grab, w[4]);
    out->add("js", js, 0.0);
    out->add("goal", goal, w[2]);
    out->add("s", s, w[3]);
  } else {
    out->branch = 2;
    out->add("grab", grab, 0.0);
    out->add("js", js, w[6]);
    out->add("goal", goal, w[5]);
    out->add("s", s, 0.0);
  }
  out->finalize();
}

void tennis(const RacketInput& in, const Weights& w, RewardBreakdown* out) {
  racket(in, w, false, out);
}

void table_tennis(const RacketInput& in, const Weights& w, RewardBreakdown* out) {
  racket(in, w, true, out);
}

bool point_condition(double min_distance, double force) {
  return min_distance <= kPointDistance && force >= kPointForce;
}

void fencing(const CombatInput& in, const Weights& w, RewardBreakdown* out) { combat(in, w, out); }
void boxing(const CombatInput& in, const Weights& w, RewardBreakdown* out) { combat(in, w, out); }

void penalty_kick(const KickInput& in, const Weights& w, RewardBreakdown* out) {
  const double g_b2g = progress(in.prev_ball, in.ball, in.target);
  const double p2b = (xy(in.prev_root) - xy(in.prev_ball)).norm() - (xy(in.root) - xy(in.ball)).norm();
  const double bv2g = velocity_alignment(xy(in.ball_vel), xy(in.target) - xy(in.ball));
  const Vec3 p0(in.ball.x(), in.ball.y(), std::max(in.ball.z(), 0.0));
  const double b2t =
      land_falloff(ballistics::predict_land_ground({p0, in.ball_vel}), xy(in.target), 1.0);
  const double dribble = (xy(in.root) - in.ball_spawn).dot(in.attack_dir) > 0.0 ? 1.0 : 0.0;
  const bool moving = g_b2g > 0.0;
  out->clear();
  out->branch = moving ? 1 : 0;
  out->add("p2b", p2b, moving ? 0.0 : w[0]);
  out->add("b2g", g_b2g, moving ? w[1] : 0.0);
  out->add("bv2g", bv2g, moving ? w[2] : 0.0);
  out->add("b2t", b2t, moving ? w[3] : 0.0);
  out->add("no_dribble", dribble, -w[4]);
  out->finalize();
}

void soccer_match(const MatchInput& in, const Weights& w, RewardBreakdown* out) {
  const double p2b = (xy(in.prev_root) - xy(in.prev_ball)).norm() - (xy(in.root) - xy(in.ball)).norm();
  const bool near = (xy(in.root) - xy(in.ball)).norm() <= kBallGate;
  const double b2g = near ? progress(in.prev_ball, in.ball, in.target) : 0.0;
  const double bv2g =
      near ? velocity_alignment(xy(in.ball_vel), xy(in.target) - xy(in.ball)) : 0.0;
  out->clear();
  out->branch = near ? 1 : 0;
  out->add("p2b", p2b, w[0]);
  out->add("b2g", b2g, w[1]);
  out->add("bv2g", bv2g, w[2]);
  out->add("point", static_cast<double>(in.scored), w[3]);
  out->finalize();
}

void free_throw(const FreeThrowInput& in, const Weights& w, RewardBreakdown* out) {
  out->clear();
  Vec3 desired;
  try {
    desired = ballistics::desired_throw_velocity(in.ball, in.hoop, kGravity, in.mode);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateTarget) throw;
    out->fault = true;
    out->add("ballvel", 0.0, w[0]);
    out->add("bv2g", 0.0, w[1]);
    out->add("basket", 0.0, w[2]);
    out->finalize();
    return;
  }
  out->add("ballvel", std::exp(-0.1 * (in.ball_vel - desired).squaredNorm()), w[0]);
  out->add("bv2g", velocity_alignment(xy(in.ball_vel), xy(in.hoop) - xy(in.ball)), w[1]);
  out->add("basket", in.basket ? 1.0 : 0.0, w[2]);
  out->finalize();
}

}  // namespace sportsim::rewards
