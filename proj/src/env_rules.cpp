#include <cmath>
#include <sstream>

#include "sportsim/envs.hpp"

namespace sportsim::envs {

namespace {

using TR = TerminationReason;

constexpr TR kHighJumpRules[] = {TR::kSimulationFault, TR::kFall,    TR::kBarContact,
                                 TR::kBarNotCleared,   TR::kOffTrack, TR::kTaskComplete,
                                 TR::kTimeLimit};
constexpr TR kTrackRules[] = {TR::kSimulationFault, TR::kFall, TR::kOffTrack, TR::kTaskComplete,
                              TR::kTimeLimit};
constexpr TR kGolfRules[] = {TR::kSimulationFault,   TR::kFall,         TR::kBallTooCloseToBody,
                             TR::kNoContactTimeout,  TR::kBallBackward, TR::kTaskComplete,
                             TR::kTimeLimit};
constexpr TR kJavelinRules[] = {TR::kSimulationFault,      TR::kFall,
                                TR::kJavelinDetached,      TR::kJavelinPoseDeviation,
                                TR::kJavelinNotReleased,   TR::kTaskComplete,
                                TR::kTimeLimit};
constexpr TR kRacketRules[] = {TR::kSimulationFault, TR::kFall, TR::kLostPoint, TR::kTimeLimit};
constexpr TR kFencingRules[] = {TR::kSimulationFault, TR::kFall, TR::kOutOfBounds,
                                TR::kPointScored, TR::kTimeLimit};
constexpr TR kBoxingRules[] = {TR::kSimulationFault, TR::kFall, TR::kOutOfBounds, TR::kTimeLimit};
constexpr TR kKickRules[] = {TR::kSimulationFault, TR::kFall, TR::kPointScored, TR::kOutOfBounds,
                             TR::kTimeLimit};
constexpr TR kSoccerRules[] = {TR::kSimulationFault, TR::kFall, TR::kTimeLimit};
constexpr TR kFreeThrowRules[] = {TR::kSimulationFault, TR::kFall,        TR::kPointScored,
                                  TR::kLostPoint,       TR::kOutOfBounds, TR::kTimeLimit};

constexpr double kJointRadius = 0.05;
constexpr double kBarHalfThickness = 0.02;
constexpr double kHurdleHalfWidth = 0.6;
constexpr double kMinBarHeight = 0.05;

// Distance from p to an axis-aligned box given in arena-local coordinates.
double box_distance(const Vec3& p, const Vec3& center, const Vec3& half) {
  const Vec3 d = ((p - center).cwiseAbs() - half).cwiseMax(0.0);
  return d.norm();
}

bool any_joint_near_box(const Snapshot& snap, const AgentView& a, const Vec3& center,
                        const Vec3& half) {
  for (const Vec3& p : a.body.joint_pos)
    if (box_distance(snap.local(p), center, half) <= kJointRadius) return true;
  return false;
}

Vec3 high_jump_bar(const SportConfig& cfg, const Snapshot& snap) {
  return {cfg.arena.high_jump_bar_x, cfg.arena.high_jump_bar_y, snap.bar_height};
}

bool hurdle_trip(const SportConfig& cfg, const Snapshot& snap, const AgentView& a) {
  for (size_t k = 0; k < snap.hurdle_heights.size(); ++k) {
    const double h = snap.hurdle_heights[k];
    if (h < kMinBarHeight) continue;
    const Vec3 c(cfg.arena.hurdle_first + cfg.arena.hurdle_spacing * k, 0.0, h - kBarHalfThickness);
    if (any_joint_near_box(snap, a, c, Vec3(kBarHalfThickness, kHurdleHalfWidth, kBarHalfThickness)))
      return true;
  }
  return false;
}

bool outside(const Vec3& local, double half_x, double half_y) {
  return std::abs(local.x()) > half_x || std::abs(local.y()) > half_y;
}

bool fires(TR rule, const SportConfig& cfg, const SkeletonSpec& sk, const Snapshot& snap) {
  const Arena& A = cfg.arena;
  const AgentView& a0 = snap.agents[0];
  const Vec3 root0 = snap.local(a0.body.root());
  switch (rule) {
    case TR::kSimulationFault:
      return snap.fault;
    case TR::kFall:
      for (const auto& a : snap.agents)
        if (fallen(a, sk)) return true;
      return snap.sport == Sport::kHurdling && hurdle_trip(cfg, snap, a0);
    case TR::kBarContact:
      return snap.bar_height >= kMinBarHeight &&
             any_joint_near_box(snap, a0, high_jump_bar(cfg, snap),
                                Vec3(kBarHalfThickness, A.high_jump_bar_half_length, kBarHalfThickness));
    case TR::kBarNotCleared:
      return snap.bar_crossed && !snap.bar_cleared;
    case TR::kOffTrack:
      switch (snap.sport) {
        case Sport::kHighJump:
          return root0.x() < -5.0 || root0.x() > A.high_jump_bar_x + 7.0 || root0.y() < -3.0 ||
                 root0.y() > A.high_jump_bar_y + 3.0;
        case Sport::kLongJump: {
          if (std::abs(root0.y()) > A.track_half_width || root0.x() < -5.0) return true;
          // Foul: a grounded foot beyond the jump line before any take-off.
          if (!a0.grounded || snap.took_off || snap.landed) return false;
          const EndEffectors& ee = sk.end_effectors;
          return snap.local(a0.body.joint_pos[ee.left_foot]).x() > A.long_jump_line ||
                 snap.local(a0.body.joint_pos[ee.right_foot]).x() > A.long_jump_line;
        }
        default:
          return std::abs(root0.y()) > A.track_half_width || root0.x() < -5.0;
      }
    case TR::kTaskComplete:
      switch (snap.sport) {
        case Sport::kHighJump:
          return snap.bar_cleared && a0.grounded && root0.x() >= A.high_jump_bar_x + 1.0;
        case Sport::kHurdling:
          return root0.x() >= A.track_finish;
        default:
          return snap.landed;
      }
    case TR::kBallTooCloseToBody:
      return (xy(a0.body.root()) - xy(snap.ball.kin.pos)).norm() < A.golf_body_clearance;
    case TR::kNoContactTimeout:
      return !a0.latched && snap.elapsed > A.golf_contact_timeout;
    case TR::kBallBackward:
      return snap.local(snap.ball.kin.pos).x() - snap.local(snap.ball_spawn).x() < -0.1;
    case TR::kJavelinDetached:
      return !snap.released && (a0.wrist - snap.ball.kin.pos).norm() > A.javelin_detach_distance;
    case TR::kJavelinPoseDeviation: {
      if (snap.released) return false;
      const Vec3 axis = snap.ball.kin.orient * Vec3::UnitX();
      const Rot6 ref = rewards::javelin_default_pose(snap.arena.yaw);
      const Vec3 ref_axis(ref[0], ref[1], ref[2]);
      return axis.dot(ref_axis) < std::cos(A.javelin_max_deviation);
    }
    case TR::kJavelinNotReleased:
      if (!snap.released) return snap.elapsed > A.javelin_release_deadline;
      return snap.elapsed >= 1.2 &&
             (a0.wrist - snap.ball.kin.pos).norm() < A.javelin_min_clearance;
    case TR::kLostPoint:
      if (snap.sport == Sport::kFreeThrow) return snap.released && snap.ball_grounded && !snap.basket;
      return snap.lost_point;
    case TR::kOutOfBounds:
      switch (snap.sport) {
        case Sport::kFencing:
          for (const auto& a : snap.agents)
            if (outside(snap.local(a.body.root()), 0.5 * A.piste_length, 0.5 * A.piste_width))
              return true;
          return false;
        case Sport::kBoxing:
          for (const auto& a : snap.agents)
            if (outside(snap.local(a.body.root()), 0.5 * A.ring_size, 0.5 * A.ring_size))
              return true;
          return false;
        case Sport::kPenaltyKick:
          return snap.ball_out || outside(root0, 0.5 * A.field_length, 0.5 * A.field_width);
        case Sport::kFreeThrow:
          return snap.ball_out || outside(root0, 0.5 * A.court_b_length, 0.5 * A.court_b_width);
        default:
          return false;
      }
    case TR::kPointScored:
      switch (snap.sport) {
        case Sport::kFencing:
          for (const auto& a : snap.agents)
            if (a.point) return true;
          return false;
        case Sport::kPenaltyKick:
          return snap.goal;
        case Sport::kFreeThrow:
          return snap.basket;
        default:
          return false;
      }
    case TR::kTimeLimit:
      return snap.elapsed >= cfg.time_limit;
    case TR::kNone:
      return false;
  }
  return false;
}

}  // namespace

const char* to_string(TerminationReason r) {
  switch (r) {
    case TR::kNone: return "none";
    case TR::kFall: return "fall";
    case TR::kBarContact: return "bar_contact";
    case TR::kBarNotCleared: return "bar_not_cleared";
    case TR::kOutOfBounds: return "out_of_bounds";
    case TR::kOffTrack: return "off_track";
    case TR::kBallBackward: return "ball_backward";
    case TR::kNoContactTimeout: return "no_contact_timeout";
    case TR::kBallTooCloseToBody: return "ball_too_close_to_body";
    case TR::kLostPoint: return "lost_point";
    case TR::kJavelinDetached: return "javelin_detached";
    case TR::kJavelinPoseDeviation: return "javelin_pose_deviation";
    case TR::kJavelinNotReleased: return "javelin_not_released";
    case TR::kPointScored: return "point_scored";
    case TR::kTaskComplete: return "task_complete";
    case TR::kTimeLimit: return "time_limit";
    case TR::kSimulationFault: return "simulation_fault";
  }
  return "none";
}

std::span<const TerminationReason> termination_rules(Sport sport) {
  switch (sport) {
    case Sport::kHighJump: return kHighJumpRules;
    case Sport::kLongJump:
    case Sport::kHurdling: return kTrackRules;
    case Sport::kGolf: return kGolfRules;
    case Sport::kJavelin: return kJavelinRules;
    case Sport::kTennis:
    case Sport::kTableTennis: return kRacketRules;
    case Sport::kFencing: return kFencingRules;
    case Sport::kBoxing: return kBoxingRules;
    case Sport::kPenaltyKick: return kKickRules;
    case Sport::kSoccer: return kSoccerRules;
    case Sport::kFreeThrow: return kFreeThrowRules;
  }
  return {};
}

bool fallen(const AgentView& agent, const SkeletonSpec& skeleton) {
  const auto& pos = agent.body.joint_pos;
  if (pos[0].z() < 0.15) return true;
  if (pos[skeleton.end_effectors.head].z() < 0.1) return true;
  for (const char* torso : {"Spine1", "Spine2", "Spine3"}) {
    const int j = skeleton.index_of(torso);
    if (j >= 0 && pos[j].z() < 0.1) return true;
  }
  return false;
}

std::optional<TerminationReason> check_termination(const SportConfig& cfg,
                                                    const SkeletonSpec& skeleton,
                                                    const Snapshot& snap) {
  if (snap.agents.empty())
    throw Error(ErrorCode::kConfiguration, "snapshot has no agents");
  for (TR rule : termination_rules(snap.sport))
    if (fires(rule, cfg, skeleton, snap)) return rule;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Observations

namespace {

// Agent heading frame: rotate by -heading about z around the root's x-y.
struct AgentFrame {
  double c, s;
  Vec2 origin;

  explicit AgentFrame(const AgentView& a)
      : c(std::cos(-a.heading)), s(std::sin(-a.heading)), origin(xy(a.body.root())) {}

  Vec3 point(const Vec3& p) const {
    return rotate_z(Vec3(p.x() - origin.x(), p.y() - origin.y(), p.z()), c, s);
  }
  Vec3 dir(const Vec3& v) const { return rotate_z(v, c, s); }
};

struct Writer {
  float* out;
  void put(double v) { *out++ = static_cast<float>(v); }
  void put(const Vec3& v) {
    put(v.x());
    put(v.y());
    put(v.z());
  }
  void put_xy(const Vec3& v) {
    put(v.x());
    put(v.y());
  }
};

void require_ball(const Snapshot& snap) {
  if (!snap.has_ball) throw Error(ErrorCode::kConfiguration, "snapshot has no ball entity");
}

void require_agents(const Snapshot& snap, int n) {
  if (static_cast<int>(snap.agents.size()) < n)
    throw Error(ErrorCode::kConfiguration, "snapshot is missing an agent");
}

int team_size(const SportConfig& cfg) { return std::max(1, cfg.agents / 2); }

void ball_state(Writer& w, const AgentFrame& f, const Snapshot& snap) {
  w.put(f.point(snap.ball.kin.pos));
  w.put(f.dir(snap.ball.kin.lin_vel));
  w.put(f.dir(snap.ball.kin.ang_vel));
}

std::array<int, rewards::kCombatTargets> combat_target_joints(const SkeletonSpec& sk) {
  return {sk.require("Pelvis"), sk.require("Head"), sk.require("Spine1"), sk.require("Spine2"),
          sk.require("Spine3")};
}

}  // namespace

Vec3 goal_center(const SportConfig& cfg, int team) {
  const double x = 0.5 * cfg.arena.field_length;
  return {team == 0 ? x : -x, 0.0, 0.5 * cfg.arena.goal_height};
}

std::vector<ObsSegment> goal_layout(const SportConfig& cfg, const SkeletonSpec& sk) {
  const int J = sk.joint_count;
  switch (cfg.sport) {
    case Sport::kHighJump: return {{"bar", 3}, {"goal", 3}};
    case Sport::kLongJump: return {{"start", 3}, {"jump_line", 3}, {"goal", 3}};
    case Sport::kHurdling: return {{"hurdles", 3 * cfg.arena.hurdle_count}, {"finish", 3}};
    case Sport::kGolf:
      return {{"ball", 3},
              {"club", 3},
              {"target", 3},
              {"heightmap", cfg.arena.heightmap_size * cfg.arena.heightmap_size}};
    case Sport::kJavelin: return {{"javelin", 13}, {"root", 3}, {"right_hand", 3}};
    case Sport::kTennis:
    case Sport::kTableTennis:
      return {{"ball", 3}, {"ball_vel", 3}, {"racket", 3}, {"target", 3}};
    case Sport::kFencing:
    case Sport::kBoxing: {
      std::vector<ObsSegment> v = {{"opp_pos", 3 * J},
                                   {"opp_vel", 3 * J},
                                   {"strike_diff", 3 * rewards::kCombatTargets},
                                   {"contact_self", J},
                                   {"contact_opp", J}};
      if (cfg.sport == Sport::kFencing) v.push_back({"bounds", 4});
      return v;
    }
    case Sport::kPenaltyKick:
      return {{"ball", 3}, {"ball_vel", 6}, {"goal_posts", 4}, {"target", 3}};
    case Sport::kSoccer: {
      const int t = team_size(cfg);
      return {{"ball", 3},
              {"ball_vel", 6},
              {"goal_posts", 4},
              {"ally_roots", 3 * (t - 1)},
              {"opp_roots", 3 * (cfg.agents - t)}};
    }
    case Sport::kFreeThrow:
      return {{"ball", 3}, {"ball_vel", 6}, {"hoop_rim", 4}, {"hoop", 3}};
  }
  return {};
}

int goal_dim(const SportConfig& cfg, const SkeletonSpec& sk) {
  int n = 0;
  for (const auto& s : goal_layout(cfg, sk)) n += s.size;
  return n;
}

void assemble_goal_obs(const SportConfig& cfg, const SkeletonSpec& sk, const Snapshot& snap,
                       int agent, float* out) {
  require_agents(snap, agent + 1);
  const Arena& A = cfg.arena;
  const AgentView& me = snap.agents[agent];
  const AgentFrame f(me);
  const PlanarFrame& arena = snap.arena;
  Writer w{out};
  switch (cfg.sport) {
    case Sport::kHighJump:
      w.put(f.point(arena.to_world({A.high_jump_bar_x, A.high_jump_bar_y, snap.bar_height})));
      w.put(f.point(snap.targets[agent]));
      break;
    case Sport::kLongJump:
      w.put(f.point(snap.start));
      w.put(f.point(arena.to_world({A.long_jump_line, 0.0, 0.0})));
      w.put(f.point(snap.targets[agent]));
      break;
    case Sport::kHurdling:
      if (static_cast<int>(snap.hurdle_heights.size()) != A.hurdle_count)
        throw Error(ErrorCode::kConfiguration, "snapshot hurdle count mismatch");
      for (int k = 0; k < A.hurdle_count; ++k)
        w.put(f.point(arena.to_world({A.hurdle_first + A.hurdle_spacing * k, 0.0, snap.hurdle_heights[k]})));
      w.put(f.point(snap.targets[agent]));
      break;
    case Sport::kGolf: {
      require_ball(snap);
      w.put(f.point(snap.ball.kin.pos));
      w.put(f.point(me.implement));
      w.put(f.point(snap.targets[agent]));
      const int n = A.heightmap_size;
      snap.terrain.sample_patch(me.body.root(), me.heading, A.heightmap_spacing, n, n,
                                me.body.root().z(), w.out);
      w.out += n * n;
      break;
    }
    case Sport::kJavelin: {
      require_ball(snap);
      const auto& k = snap.ball.kin;
      w.put(f.point(k.pos));
      const Quat q = Quat(Eigen::AngleAxisd(-me.heading, Vec3::UnitZ())) * k.orient;
      w.put(q.w());
      w.put(q.x());
      w.put(q.y());
      w.put(q.z());
      w.put(f.dir(k.lin_vel));
      w.put(f.dir(k.ang_vel));
      w.put(f.dir(me.body.root() - snap.start));
      w.put(f.point(me.wrist));
      break;
    }
    case Sport::kTennis:
    case Sport::kTableTennis:
      require_ball(snap);
      w.put(f.point(snap.ball.kin.pos));
      w.put(f.dir(snap.ball.kin.lin_vel));
      w.put(f.point(me.implement));
      w.put(f.point(snap.targets[agent]));
      break;
    case Sport::kFencing:
    case Sport::kBoxing: {
      require_agents(snap, 2);
      const AgentView& opp = snap.agents[1 - agent];
      for (const Vec3& p : opp.body.joint_pos) w.put(f.point(p));
      for (const Vec3& v : opp.body.lin_vel) w.put(f.dir(v));
      for (int j : combat_target_joints(sk)) w.put(f.dir(opp.body.joint_pos[j] - me.implement));
      me.contacts.squared_norms(w.out);
      w.out += sk.joint_count;
      opp.contacts.squared_norms(w.out);
      w.out += sk.joint_count;
      if (cfg.sport == Sport::kFencing) {
        const Vec3 r = snap.local(me.body.root());
        const double hx = 0.5 * A.piste_length, hy = 0.5 * A.piste_width;
        w.put(hx - r.x());
        w.put(r.x() + hx);
        w.put(hy - r.y());
        w.put(r.y() + hy);
      }
      break;
    }
    case Sport::kPenaltyKick:
    case Sport::kSoccer: {
      require_ball(snap);
      ball_state(w, f, snap);
      const int attack = cfg.sport == Sport::kSoccer ? me.team : 0;
      const double gx = attack == 0 ? 0.5 * A.field_length : -0.5 * A.field_length;
      const double gy = 0.5 * A.goal_width;
      w.put_xy(f.point(arena.to_world({gx, gy, 0.0})));
      w.put_xy(f.point(arena.to_world({gx, -gy, 0.0})));
      if (cfg.sport == Sport::kPenaltyKick) {
        w.put(f.point(snap.targets[agent]));
      } else {
        for (size_t i = 0; i < snap.agents.size(); ++i)
          if (static_cast<int>(i) != agent && snap.agents[i].team == me.team)
            w.put(f.point(snap.agents[i].body.root()));
        for (const auto& other : snap.agents)
          if (other.team != me.team) w.put(f.point(other.body.root()));
      }
      break;
    }
    case Sport::kFreeThrow: {
      require_ball(snap);
      ball_state(w, f, snap);
      const Vec3 hoop = snap.targets[agent];
      const Vec3 side = arena.dir_to_world({0.0, A.hoop_radius, 0.0});
      w.put_xy(f.point(hoop + side));
      w.put_xy(f.point(hoop - side));
      w.put(f.point(hoop));
      break;
    }
  }
}

std::string environment_card(const SportConfig& cfg) {
  const SkeletonSpec& sk = skeleton_for(cfg);
  const int prop = sk.joint_count * BodyState::kValuesPerJoint;
  std::ostringstream os;
  os << "# " << cfg.env << "\n\n";
  os << "sport: " << sport_name(cfg.sport) << "\n";
  os << "agents: " << cfg.agents << "\n";
  os << "skeleton: " << sk.name << " (" << sk.joint_count << " joints, " << sk.actuated_count
     << " actuated)\n";
  os << "action_dim: " << sk.action_dim << "\n";
  os << "obs_dim: " << prop + goal_dim(cfg, sk) << " per agent\n";
  os << "control: " << physics::kPolicyHz << " Hz policy, " << physics::kSimHz
     << " Hz simulation, actuation cap " << physics::kActuationCap << "\n";
  os << "time_limit: " << cfg.time_limit << " s\n";
  os << "config_hash: " << std::hex << cfg.hash() << std::dec << "\n\n";
  os << "## Observation layout\n\n";
  os << "All positions are relative to the agent root (x-y) in its heading frame.\n\n";
  int offset = 0;
  auto row = [&](const std::string& name, int size) {
    os << "- [" << offset << ", " << offset + size << ") " << name << " (" << size << ")\n";
    offset += size;
  };
  row("joint_rot", 6 * sk.joint_count);
  row("joint_pos", 3 * sk.joint_count);
  row("joint_ang_vel", 3 * sk.joint_count);
  row("joint_lin_vel", 3 * sk.joint_count);
  for (const auto& s : goal_layout(cfg, sk)) row(s.name, s.size);
  os << "\n## Reward terms\n\n";
  const auto& info = rewards::kernel_info(reward_kernel(cfg.sport));
  for (int i = 0; i < info.weight_count; ++i)
    os << "- " << info.weight_names[i] << " = " << cfg.weights[i] << "\n";
  os << "\n## Termination rules (first match wins)\n\n";
  int n = 1;
  for (TerminationReason r : termination_rules(cfg.sport)) os << n++ << ". " << to_string(r) << "\n";
  os << "\n## Metrics\n\n";
  switch (cfg.sport) {
    case Sport::kHighJump: os << "Suc Rate, Height (max root height over the bar window)\n"; break;
    case Sport::kLongJump: os << "Suc Rate, Avg Dis (root landing x minus jump line)\n"; break;
    case Sport::kHurdling: os << "Suc Rate, Avg Dis (furthest root x), Time\n"; break;
    case Sport::kGolf: os << "Hit Rate, Error Dis (resting ball to target, x-y)\n"; break;
    case Sport::kJavelin: os << "Suc Rate, Avg Dis (javelin landing x minus throw start)\n"; break;
    case Sport::kTennis:
    case Sport::kTableTennis: os << "Avg Hits, Error Dis (return bounce to target, x-y)\n"; break;
    case Sport::kPenaltyKick: os << "Suc Rate, Error Dis (goal-plane crossing to target)\n"; break;
    case Sport::kFreeThrow: os << "Suc Rate, Error Dis (hoop-plane crossing to hoop centre)\n"; break;
    default: os << "Suc Rate (agent 0 side wins), Avg Hits (points for agent 0 side)\n"; break;
  }
  return os.str();
}

}  // namespace sportsim::envs
