#include <algorithm>
#include <cmath>

#include "sportsim/ballistics.hpp"
#include "sportsim/envs.hpp"

namespace sportsim::envs {

using physics::FreeObject;
using physics::ObjectSpec;
using physics::Shape;
using physics::StaticBox;

namespace {

constexpr double kBounceDv = 0.5;     // m/s velocity change that counts as a bounce
constexpr double kDeadBall = 0.3;     // m/s, a resting ball ends the rally
constexpr double kLandedSpeed = 0.05;  // golf ball at rest
const Vec3 kClubOffset(0.4, 0.22, -0.84);
const Vec3 kClubHalf(0.025, 0.0125, 0.01);
constexpr double kGloveOffset = 0.1;
constexpr double kHoldOffset = 0.25;  // free-throw ball ahead of the wrists

enum BoxTag { kNet = 1, kTable = 2 };

Quat quat_from_rot6(const Rot6& r) {
  Mat3 m;
  rot6_to_matrix(r, &m);
  return Quat(m).normalized();
}

int side_sign(int agent) { return agent == 0 ? -1 : 1; }

}  // namespace

void MatchState::award(int side) {
  score[side] += 1;
  point_event[side] = 1;
  point_event[1 - side] = -1;
  hits = {0, 0};
  bounces = 0;
}

const SkeletonSpec& skeleton_for(const SportConfig& cfg) {
  if (cfg.skeleton == "smpl") return smpl_skeleton();
  if (cfg.skeleton == "smplx") return smplx_skeleton();
  throw Error(ErrorCode::kConfiguration, "unknown skeleton '" + cfg.skeleton + "'");
}

Env::Env(SportConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  skeleton_ = &skeleton_for(cfg_);
  const SkeletonSpec& sk = *skeleton_;
  backend_ = std::make_unique<physics::ProxyBackend>(sk, cfg_.agents);
  goal_dim_ = envs::goal_dim(cfg_, sk);
  rewards_.resize(cfg_.agents);
  armed_.assign(cfg_.agents, 1);
  scratch_ = BodyState(sk.joint_count);

  head_ = sk.end_effectors.head;
  lfoot_ = sk.end_effectors.left_foot;
  rfoot_ = sk.end_effectors.right_foot;
  lwrist_ = sk.require("L_Wrist");
  rwrist_ = sk.require("R_Wrist");
  combat_targets_ = {sk.require("Pelvis"), sk.require("Head"), sk.require("Spine1"),
                     sk.require("Spine2"), sk.require("Spine3")};

  snap_.sport = cfg_.sport;
  snap_.agents.resize(cfg_.agents);
  snap_.targets.assign(cfg_.agents, Vec3::Zero());
  const int team = std::max(1, cfg_.agents / 2);
  for (int a = 0; a < cfg_.agents; ++a) {
    AgentView& v = snap_.agents[a];
    v.body = BodyState(sk.joint_count);
    v.contacts = ContactSet(sk.joint_count);
    v.contacts.register_pair("strike", false);
    v.team = a < team ? 0 : 1;
  }

  const Arena& A = cfg_.arena;
  switch (cfg_.sport) {
    case Sport::kGolf:
      snap_.has_ball = true;
      snap_.ball.spec = {Shape::sphere(A.golf_ball_radius), A.golf_ball_mass,
                         A.golf_ball_restitution, A.golf_ball_friction};
      snap_.terrain.amplitude = A.terrain_amplitude;
      snap_.terrain.wavelength = A.terrain_wavelength;
      break;
    case Sport::kJavelin:
      snap_.has_ball = true;
      snap_.ball.spec = {Shape::capsule(A.javelin_radius, 0.5 * A.javelin_length), A.javelin_mass,
                         0.1, 0.8};
      break;
    case Sport::kTennis:
      snap_.has_ball = true;
      snap_.ball.spec = {Shape::sphere(A.tennis_ball_radius), A.tennis_ball_mass,
                         A.tennis_ball_restitution, 0.3};
      geometry_.boxes.push_back({Vec3(0, 0, 0.5 * A.court_net_height),
                                 Vec3(0.02, 0.5 * A.court_width + 0.914, 0.5 * A.court_net_height),
                                 0.0, kNet, true});
      break;
    case Sport::kTableTennis: {
      snap_.has_ball = true;
      snap_.ball.spec = {Shape::sphere(A.table_ball_radius), A.table_ball_mass,
                         A.table_ball_restitution, 0.2};
      const double h = A.table_height;
      geometry_.boxes.push_back({Vec3(0, 0, 0.5 * h),
                                 Vec3(0.5 * A.table_length, 0.5 * A.table_width, 0.5 * h), 0.0,
                                 kTable, true});
      const double nh = 0.5 * A.table_net_height;
      geometry_.boxes.push_back({Vec3(0, 0, h + nh),
                                 Vec3(0.005, 0.5 * A.table_width + 0.1525, nh), 0.0, kNet, true});
      break;
    }
    case Sport::kPenaltyKick:
    case Sport::kSoccer:
      snap_.has_ball = true;
      snap_.ball.spec = {Shape::sphere(0.5 * A.soccer_ball_diameter), A.soccer_ball_mass,
                         A.soccer_ball_restitution, A.soccer_ball_friction};
      break;
    case Sport::kFreeThrow:
      snap_.has_ball = true;
      snap_.ball.spec = {Shape::sphere(A.basketball_radius), A.basketball_mass,
                         A.basketball_restitution, 0.4};
      break;
    default:
      break;
  }
  if (snap_.has_ball) snap_.ball.spec.validate();
  local_boxes_ = geometry_.boxes;
  if (cfg_.sport == Sport::kHurdling) snap_.hurdle_heights.assign(A.hurdle_count, 0.0);
  reset(0);
}

void Env::place_agent(int agent, const Vec3& local_root, double local_yaw) {
  backend_->place(agent, world(local_root), snap_.arena.yaw + local_yaw);
}

void Env::set_arena(const PlanarFrame& frame) {
  snap_.arena = frame;
  for (size_t i = 0; i < local_boxes_.size(); ++i) {
    physics::StaticBox& b = geometry_.boxes[i];
    b.center = frame.to_world(local_boxes_[i].center);
    b.yaw = wrap_angle(frame.yaw + local_boxes_[i].yaw);
  }
}

void Env::place_ball(const Vec3& local_pos) {
  FreeObject& b = snap_.ball;
  b.kin = ObjectKinematics{};
  b.kin.pos = world(local_pos);
  b.attached = false;
  snap_.prev_ball = b.kin.pos;
}

void Env::reset(std::uint64_t seed) {
  seed_ = seed;
  rng_ = Rng(seed);
  const PlanarFrame arena = snap_.arena;
  snap_.step = 0;
  snap_.elapsed = 0.0;
  snap_.fault = false;
  snap_.arena = arena;
  snap_.window_max_z = 0.0;
  snap_.bar_crossed = snap_.bar_cleared = false;
  snap_.took_off = snap_.landed = false;
  snap_.landing = Vec3::Zero();
  snap_.released = false;
  snap_.release_time = 0.0;
  snap_.ball_grounded = false;
  snap_.lost_point = false;
  snap_.loser = -1;
  snap_.goal = false;
  snap_.scoring_team = -1;
  snap_.ball_out = false;
  snap_.goal_plane_crossed = false;
  snap_.goal_crossing = Vec3::Zero();
  snap_.basket = false;
  snap_.max_travel = 0.0;
  snap_.ball.attached = false;
  snap_.ball.kin = ObjectKinematics{};
  for (auto& v : snap_.agents) {
    v.contacts.reset();
    v.latched = false;
    v.point = false;
  }
  match_ = MatchState{};
  reason_ = TerminationReason::kNone;
  summary_ = EpisodeSummary{};
  error_sum_ = 0.0;
  error_count_ = 0;
  total_hits_ = {0, 0};
  std::fill(armed_.begin(), armed_.end(), 1);
  pending_kickoff_ = pending_ball_reset_ = false;
  max_actuation_ = 0.0;
  ball_contacts_[0].clear();

  reset_sport();
  refresh_views();
  for (auto& v : snap_.agents) v.prev_root = v.body.root();
  snap_.prev_ball = snap_.ball.kin.pos;
  snap_.start = snap_.agents[0].body.root();
  snap_.max_travel = snap_.local(snap_.start).x();
  for (auto& r : rewards_) r.clear();
  summary_.sport = cfg_.sport;
  summary_.seed = seed_;
}

void Env::reset_sport() {
  const Arena& A = cfg_.arena;
  const double stand = skeleton_->stand_height;
  switch (cfg_.sport) {
    case Sport::kHighJump: {
      snap_.bar_height = cfg_.curriculum.sample(rng_, A.high_jump_bar_height);
      place_agent(0, {0, 0, stand}, std::atan2(A.high_jump_bar_y, A.high_jump_bar_x));
      snap_.targets[0] = world(rewards::kHighJumpGoal);
      break;
    }
    case Sport::kLongJump:
      place_agent(0, {0, 0, stand}, 0.0);
      snap_.targets[0] = world(rewards::kLongJumpGoal);
      break;
    case Sport::kHurdling:
      for (double& h : snap_.hurdle_heights) h = cfg_.curriculum.sample(rng_, A.hurdle_height);
      place_agent(0, {0, 0, stand}, 0.0);
      snap_.targets[0] = world({A.track_finish, 0, 1.0});
      break;
    case Sport::kGolf: {
      // Phases chosen so the terrain passes through z = 0 under the ball.
      physics::Terrain& t = snap_.terrain;
      t.phase_x = rng_.uniform(0.0, 2.0 * kPi);
      t.phase_y = rng_.below(2) == 0 ? -t.phase_x : kPi + t.phase_x;
      const Vec3 ball_local(0.1, -0.4, 0.0);
      t.frame = snap_.arena.compose(PlanarFrame{0.0, xy(ball_local)});
      place_agent(0, {0, 0, stand}, -0.5 * kPi);
      place_ball(ball_local + Vec3(0, 0, A.golf_ball_radius + 1e-9));
      snap_.ball_spawn = snap_.ball.kin.pos;
      Vec3 target = world(ball_local + Vec3(rng_.uniform(A.golf_target_min, A.golf_target_max), 0, 0));
      target.z() = t.height(target.x(), target.y());
      snap_.targets[0] = target;
      break;
    }
    case Sport::kJavelin:
      place_agent(0, {0, 0, stand}, 0.0);
      snap_.ball.attached = true;
      snap_.targets[0] = world({100.0, 0, 0});
      break;
    case Sport::kTennis:
    case Sport::kTableTennis: {
      const bool table = cfg_.sport == Sport::kTableTennis;
      const double back = table ? 0.5 * A.table_length + 0.5 : 0.5 * A.court_length;
      const double tz = table ? A.table_height : 0.0;
      for (int a = 0; a < cfg_.agents; ++a) {
        place_agent(a, {side_sign(a) * back, 0, stand}, a == 0 ? 0.0 : kPi);
        const double len = table ? A.table_length : A.court_length;
        snap_.targets[a] = world({-side_sign(a) * 0.25 * len, 0, tz});
      }
      const bool single = cfg_.agents == 1;
      launch_racket_ball(single ? 0 : static_cast<int>(rng_.below(2)), !single);
      break;
    }
    case Sport::kFencing:
    case Sport::kBoxing: {
      const double gap = 0.5 * A.combat_spawn_gap;
      place_agent(0, {-gap, 0, stand}, 0.0);
      place_agent(1, {gap, 0, stand}, kPi);
      break;
    }
    case Sport::kPenaltyKick: {
      const double goal_x = 0.5 * A.field_length;
      const double r = 0.5 * A.soccer_ball_diameter;
      place_agent(0, {goal_x - A.penalty_agent_distance, 0, stand}, 0.0);
      place_ball({goal_x - A.penalty_ball_distance, 0, r});
      snap_.ball_spawn = snap_.ball.kin.pos;
      const double hw = 0.5 * A.goal_width - r;
      snap_.targets[0] = world({goal_x, rng_.uniform(-hw, hw), rng_.uniform(r, A.goal_height - r)});
      break;
    }
    case Sport::kSoccer:
      kickoff();
      for (int a = 0; a < cfg_.agents; ++a)
        snap_.targets[a] = world(goal_center(cfg_, snap_.agents[a].team));
      break;
    case Sport::kFreeThrow:
      place_agent(0, {0, 0, stand}, 0.0);
      snap_.ball.attached = true;
      snap_.targets[0] = world({A.free_throw_distance, 0, A.hoop_height});
      break;
  }
  // Held objects start in the hand.
  if (snap_.ball.attached) substep_interactions(0.0);
}

void Env::kickoff() {
  const int t = std::max(1, cfg_.agents / 2);
  const double stand = skeleton_->stand_height;
  for (int a = 0; a < cfg_.agents; ++a) {
    const int team = snap_.agents[a].team;
    const int k = team == 0 ? a : a - t;
    const double y = (k - 0.5 * (t - 1)) * 4.0;
    place_agent(a, {team == 0 ? -2.0 : 2.0, y, stand}, team == 0 ? 0.0 : kPi);
  }
  place_ball({0, 0, 0.5 * cfg_.arena.soccer_ball_diameter});
  snap_.ball_spawn = snap_.ball.kin.pos;
}

void Env::launch_racket_ball(int receiver, bool from_center) {
  const Arena& A = cfg_.arena;
  const bool table = cfg_.sport == Sport::kTableTennis;
  const double len = table ? A.table_length : A.court_length;
  const double wid = table ? A.table_width : A.court_width;
  const double ground = table ? A.table_height : 0.0;
  const double r = snap_.ball.spec.shape.radius;
  const double net_top = ground + (table ? A.table_net_height : A.court_net_height);
  const int s = side_sign(receiver);

  const double margin = 0.1 * len;
  const Vec3 land(s * rng_.uniform(margin, 0.5 * len - margin),
                  rng_.uniform(-0.5 * wid + 0.1 * wid, 0.5 * wid - 0.1 * wid), ground + r);
  Vec3 from;
  if (from_center)
    from = Vec3(0.0, 0.0, net_top + (table ? 0.3 : 1.5));
  else
    from = Vec3(-s * 0.5 * len, rng_.uniform(-0.25 * wid, 0.25 * wid), ground + (table ? 0.3 : 1.0));

  const Vec2 dxy = xy(land) - xy(from);
  const double d = dxy.norm();
  const double dz = land.z() - from.z();
  const double g = kGravity;
  double speed = table ? rng_.uniform(A.table_speed_min, A.table_speed_max)
                       : rng_.uniform(A.tennis_speed_min, A.tennis_speed_max);
  double s2 = speed * speed;
  double disc = s2 * s2 - g * (g * d * d + 2.0 * dz * s2);
  if (disc < 0.0) {
    // Slowest speed that reaches the landing point.
    s2 = g * (dz + std::sqrt(dz * dz + d * d));
    disc = 0.0;
  }
  auto height_at_net = [&](double tan_theta) {
    // Horizontal distance travelled when crossing x = 0.
    const double dn = std::abs(from.x()) / std::abs(dxy.x()) * d;
    const double cos2 = 1.0 / (1.0 + tan_theta * tan_theta);
    return from.z() + tan_theta * dn - g * dn * dn / (2.0 * s2 * cos2);
  };
  double tan_theta = (s2 - std::sqrt(disc)) / (g * d);
  if (!from_center && height_at_net(tan_theta) < net_top + 2.0 * r)
    tan_theta = (s2 + std::sqrt(disc)) / (g * d);
  const double cos_t = 1.0 / std::sqrt(1.0 + tan_theta * tan_theta);
  const double v = std::sqrt(s2);
  const Vec2 dir = dxy / d;
  place_ball(from);
  snap_.ball.kin.lin_vel = world_dir(Vec3(v * cos_t * dir.x(), v * cos_t * dir.y(), v * cos_t * tan_theta));
  snap_.ball_spawn = snap_.ball.kin.pos;
  match_.receiver = receiver;
  match_.last_hitter = -1;
  match_.bounces = 0;
}

void Env::racket_lose(int loser) {
  if (snap_.lost_point) return;
  snap_.lost_point = true;
  snap_.loser = loser;
  match_.award(1 - loser);
}

void Env::racket_bounce(const Vec3& point, bool on_table) {
  const Arena& A = cfg_.arena;
  const bool table = cfg_.sport == Sport::kTableTennis;
  const double len = table ? A.table_length : A.court_length;
  const double wid = table ? A.table_width : A.court_width;
  const Vec3 p = snap_.local(point);
  const int rcv = match_.receiver;
  const double sx = side_sign(rcv) * p.x();
  const bool legal = sx >= 0.0 && sx <= 0.5 * len && std::abs(p.y()) <= 0.5 * wid &&
                     (!table || on_table);
  if (match_.bounces > 0) {
    racket_lose(rcv);
    return;
  }
  if (!legal) {
    if (match_.last_hitter >= 0)
      racket_lose(match_.last_hitter);
    else
      launch_racket_ball(rcv, cfg_.agents > 1);
    return;
  }
  match_.bounces = 1;
  const int hitter = match_.last_hitter;
  if (hitter < 0) return;
  match_.hits[hitter] += 1;
  total_hits_[hitter] += 1;
  if (hitter == 0) {
    error_sum_ += (xy(point) - xy(snap_.targets[0])).norm();
    error_count_ += 1;
  }
  if (cfg_.self_serve && rcv >= cfg_.agents) launch_racket_ball(0, false);
}

void Env::refresh_views() {
  const Arena& A = cfg_.arena;
  for (int a = 0; a < cfg_.agents; ++a) {
    AgentView& v = snap_.agents[a];
    v.body = backend_->state(a);
    v.heading = backend_->heading(a);
    v.grounded = backend_->grounded(a);
    v.wrist = v.body.joint_pos[rwrist_];
    const Vec3 wrist_vel = v.body.lin_vel[rwrist_];
    Vec3 offset = Vec3::Zero();
    switch (cfg_.sport) {
      case Sport::kGolf: offset = kClubOffset; break;
      case Sport::kTennis: offset = Vec3(A.racket_offset, 0, 0); break;
      case Sport::kTableTennis: offset = Vec3(A.paddle_offset, 0, 0); break;
      case Sport::kFencing: offset = Vec3(A.sword_length, 0, 0); break;
      case Sport::kBoxing: offset = Vec3(kGloveOffset, 0, 0); break;
      default: break;
    }
    const Vec3 arm = rotate_z(offset, v.heading);
    v.implement = v.wrist + arm;
    v.implement_vel = wrist_vel + v.body.ang_vel[rwrist_].cross(arm);
  }
}

void Env::substep_interactions(double dt) {
  refresh_views();
  const Arena& A = cfg_.arena;
  FreeObject& ball = snap_.ball;
  physics::ObjectContacts& bc = ball_contacts_[0];
  geometry_.terrain = cfg_.sport == Sport::kGolf ? &snap_.terrain : nullptr;
  const bool advance = dt > 0.0;
  auto step_ball = [&] {
    if (advance) physics::step_objects({&ball, 1}, dt, geometry_, ball_contacts_);
  };

  switch (cfg_.sport) {
    case Sport::kGolf: {
      AgentView& me = snap_.agents[0];
      const physics::KinematicBox club{me.implement, kClubHalf, me.heading, me.implement_vel};
      if (advance && physics::overlaps(ball, club) &&
          physics::resolve_contact(ball, club, A.implement_restitution, dt) > 0.0)
        me.latched = true;
      step_ball();
      break;
    }
    case Sport::kJavelin: {
      AgentView& me = snap_.agents[0];
      if (!snap_.released) {
        if (backend_->gripping(0) || !advance) {
          ball.attached = true;
          ball.kin.pos = me.wrist;
          ball.kin.orient = quat_from_rot6(rewards::javelin_default_pose(me.heading));
          ball.kin.lin_vel = me.body.lin_vel[rwrist_];
          ball.kin.ang_vel.setZero();
          break;
        }
        snap_.released = true;
        snap_.release_time = snap_.elapsed;
        ball.attached = false;
      }
      step_ball();
      if (bc.touched(physics::kGroundContact)) {
        snap_.ball_grounded = true;
        if (!snap_.landed) {
          snap_.landed = true;
          snap_.landing = ball.kin.pos;
        }
      }
      break;
    }
    case Sport::kTennis:
    case Sport::kTableTennis: {
      if (!advance || snap_.lost_point) break;
      const bool table = cfg_.sport == Sport::kTableTennis;
      const int rcv = match_.receiver;
      if (rcv < cfg_.agents) {
        AgentView& v = snap_.agents[rcv];
        const double radius = table ? A.paddle_radius : A.racket_radius;
        const physics::KinematicDisc disc{v.implement, rotate_z(Vec3::UnitX(), v.heading), radius,
                                          v.implement_vel};
        if (physics::overlaps(ball, disc) &&
            physics::resolve_contact(ball, disc, A.implement_restitution, dt) > 0.0) {
          v.latched = true;
          match_.last_hitter = rcv;
          match_.receiver = 1 - rcv;
          match_.bounces = 0;
        }
      }
      const Vec3 before = snap_.local(ball.kin.pos);
      step_ball();
      const Vec3 after = snap_.local(ball.kin.pos);
      // Re-arm an agent's contact latch when the ball crosses the net toward it.
      if (before.x() * after.x() < 0.0 || (before.x() != 0.0 && after.x() == 0.0)) {
        for (int a = 0; a < cfg_.agents; ++a)
          if (side_sign(a) * after.x() > 0.0) snap_.agents[a].latched = false;
      }
      const double m = ball.spec.mass;
      bool bounced = false;
      for (int i = 0; i < bc.count && !snap_.lost_point; ++i) {
        const physics::ContactEvent& e = bc.events[i];
        const bool is_table = e.geometry >= 0 && geometry_.boxes[e.geometry].tag == kTable;
        const bool surface = e.geometry == physics::kGroundContact || (is_table && e.normal.z() > 0.5);
        if (!surface || e.force * dt / m <= kBounceDv || bounced) continue;
        bounced = true;
        racket_bounce(e.point, is_table);
      }
      if (snap_.lost_point) break;
      const double len = table ? A.table_length : A.court_length;
      const double wid = table ? A.table_width : A.court_width;
      const double slack = table ? 4.0 : 10.0;
      if (std::abs(after.x()) > 0.5 * len + slack || std::abs(after.y()) > 0.5 * wid + slack ||
          after.z() < -1.0) {
        racket_lose(match_.bounces == 0 && match_.last_hitter >= 0 ? match_.last_hitter
                                                                    : match_.receiver);
      } else if (!bounced && bc.count > 0 && ball.kin.lin_vel.norm() < kDeadBall) {
        const int r = match_.receiver;
        const bool on_receiver_side = side_sign(r) * after.x() >= 0.0;
        racket_lose(on_receiver_side || match_.last_hitter < 0 ? r : match_.last_hitter);
      }
      break;
    }
    case Sport::kFencing:
    case Sport::kBoxing: {
      if (!advance) break;
      for (int a = 0; a < 2; ++a) {
        AgentView& me = snap_.agents[a];
        AgentView& opp = snap_.agents[1 - a];
        int best_j = combat_targets_[0];
        double best = (me.implement - opp.body.joint_pos[best_j]).norm();
        for (int j : combat_targets_) {
          const double d = (me.implement - opp.body.joint_pos[j]).norm();
          if (d < best) {
            best = d;
            best_j = j;
          }
        }
        if (best > A.target_radius) {
          armed_[a] = 1;
          continue;
        }
        const Vec3 dir = best > 0.0 ? Vec3((opp.body.joint_pos[best_j] - me.implement) / best)
                                    : rotate_z(Vec3::UnitX(), me.heading);
        const double closing = (me.implement_vel - opp.body.lin_vel[best_j]).dot(dir);
        const double force = A.striker_mass * std::max(closing, 0.0) / dt;
        opp.contacts.body_forces()[best_j] += force * dir;
        me.contacts.body_forces()[rwrist_] -= force * dir;
        me.contacts.mark(0, force);
        opp.contacts.mark(0, force);
        if (armed_[a] && rewards::point_condition(best, force)) {
          armed_[a] = 0;
          me.point = true;
          match_.award(me.team);
        }
      }
      break;
    }
    case Sport::kPenaltyKick:
    case Sport::kSoccer: {
      if (!advance || snap_.goal) break;
      for (auto& v : snap_.agents) {
        for (int foot : {lfoot_, rfoot_}) {
          const physics::KinematicSphere s{v.body.joint_pos[foot], A.foot_radius,
                                           v.body.lin_vel[foot]};
          if (physics::overlaps(ball, s))
            physics::resolve_contact(ball, s, A.soccer_ball_restitution, dt);
        }
      }
      const Vec3 before = snap_.local(ball.kin.pos);
      step_ball();
      const Vec3 after = snap_.local(ball.kin.pos);
      const double r = ball.spec.shape.radius;
      const double line = 0.5 * A.field_length + r;
      for (int dir : {1, -1}) {
        if (cfg_.sport == Sport::kPenaltyKick && dir < 0) continue;
        const double b = dir * before.x(), c = dir * after.x();
        if (!(b < line && c >= line)) continue;
        const double f = (line - b) / (c - b);
        const Vec3 cross = before + f * (after - before);
        snap_.goal_plane_crossed = true;
        snap_.goal_crossing = world(cross);
        if (std::abs(cross.y()) <= 0.5 * A.goal_width && cross.z() <= A.goal_height) {
          snap_.goal = true;
          snap_.scoring_team = dir > 0 ? 0 : 1;
          if (cfg_.sport == Sport::kSoccer) {
            match_.award(snap_.scoring_team);
            pending_kickoff_ = true;
          }
        } else {
          snap_.ball_out = true;
        }
      }
      if (std::abs(after.y()) > 0.5 * A.field_width || std::abs(after.x()) > line + 1.0)
        snap_.ball_out = true;
      if (cfg_.sport == Sport::kSoccer && snap_.ball_out) pending_ball_reset_ = true;
      break;
    }
    case Sport::kFreeThrow: {
      AgentView& me = snap_.agents[0];
      if (!snap_.released) {
        if (backend_->gripping(0) || !advance) {
          ball.attached = true;
          const Vec3 mid = 0.5 * (me.body.joint_pos[lwrist_] + me.body.joint_pos[rwrist_]);
          ball.kin.pos = mid + rotate_z(Vec3(kHoldOffset, 0, 0), me.heading);
          ball.kin.lin_vel = 0.5 * (me.body.lin_vel[lwrist_] + me.body.lin_vel[rwrist_]);
          ball.kin.ang_vel.setZero();
          break;
        }
        snap_.released = true;
        snap_.release_time = snap_.elapsed;
        ball.attached = false;
      }
      const Vec3 before = ball.kin.pos;
      step_ball();
      const Vec3& after = ball.kin.pos;
      const Vec3& hoop = snap_.targets[0];
      if (before.z() >= hoop.z() && after.z() < hoop.z()) {
        const double f = (before.z() - hoop.z()) / (before.z() - after.z());
        const Vec3 cross = before + f * (after - before);
        if (!snap_.goal_plane_crossed) {
          snap_.goal_plane_crossed = true;
          snap_.goal_crossing = cross;
        }
        if (!snap_.basket && (xy(cross) - xy(hoop)).norm() <= A.hoop_radius) {
          snap_.basket = true;
          snap_.goal_crossing = cross;
        }
      }
      if (bc.touched(physics::kGroundContact)) snap_.ball_grounded = true;
      const Vec3 l = snap_.local(after);
      if (std::abs(l.x()) > 0.5 * A.court_b_length || std::abs(l.y()) > 0.5 * A.court_b_width)
        snap_.ball_out = true;
      break;
    }
    default:
      break;
  }
}

void Env::after_step() {
  const Arena& A = cfg_.arena;
  AgentView& me = snap_.agents[0];
  const Vec3 root = snap_.local(me.body.root());
  const Vec3 prev = snap_.local(me.prev_root);
  snap_.max_travel = std::max(snap_.max_travel, root.x());
  switch (cfg_.sport) {
    case Sport::kHighJump: {
      const double bx = A.high_jump_bar_x;
      if (root.x() > bx - 0.5 && root.x() < bx + 0.5)
        snap_.window_max_z = std::max(snap_.window_max_z, root.z());
      if (!snap_.bar_crossed && prev.x() < bx && root.x() >= bx) {
        snap_.bar_crossed = true;
        snap_.window_max_z = std::max(snap_.window_max_z, root.z());
        snap_.bar_cleared = snap_.window_max_z >= snap_.bar_height &&
                            std::abs(root.y() - A.high_jump_bar_y) <= A.high_jump_bar_half_length;
      }
      break;
    }
    case Sport::kLongJump:
      if (!snap_.took_off && !me.grounded) {
        snap_.took_off = true;
      } else if (snap_.took_off && !snap_.landed && me.grounded) {
        if (root.x() > A.long_jump_line) {
          snap_.landed = true;
          snap_.landing = me.body.root();
        } else {
          snap_.took_off = false;  // a hop before the line does not count
        }
      }
      break;
    case Sport::kGolf: {
      if (snap_.landed || !me.latched) break;
      const FreeObject& b = snap_.ball;
      const Vec3 tl = snap_.terrain.frame.to_local(b.kin.pos);
      const double clearance = b.kin.pos.z() - snap_.terrain.height(tl.x(), tl.y()) -
                               b.spec.shape.radius;
      if (b.kin.lin_vel.norm() < kLandedSpeed && clearance < 1e-3) {
        snap_.landed = true;
        snap_.landing = b.kin.pos;
      }
      break;
    }
    case Sport::kSoccer:
      if (pending_kickoff_) {
        kickoff();
        snap_.goal = false;
        snap_.ball_out = false;
      } else if (pending_ball_reset_) {
        place_ball({0, 0, 0.5 * A.soccer_ball_diameter});
        snap_.ball_out = false;
      }
      if (pending_kickoff_ || pending_ball_reset_) {
        refresh_views();
        for (auto& v : snap_.agents) v.prev_root = v.body.root();
        snap_.prev_ball = snap_.ball.kin.pos;
      }
      pending_kickoff_ = pending_ball_reset_ = false;
      break;
    default:
      break;
  }
}

bool Env::step(std::span<const float> actions) {
  if (done()) throw Error(ErrorCode::kInvalidState, "episode finished; reset before stepping");
  const size_t expected = static_cast<size_t>(cfg_.agents) * action_dim();
  if (actions.size() != expected)
    throw Error(ErrorCode::kInvalidAction, "action block has " + std::to_string(actions.size()) +
                                               " values, expected " + std::to_string(expected));
  bool finite = true;
  for (float a : actions) finite = finite && std::isfinite(a);

  match_.begin_step();
  for (auto& v : snap_.agents) {
    v.contacts.begin_step();
    v.point = false;
    v.prev_root = v.body.root();
  }
  snap_.prev_ball = snap_.ball.kin.pos;
  if (cfg_.sport == Sport::kPenaltyKick || cfg_.sport == Sport::kSoccer) snap_.goal = false;

  if (!finite) {
    snap_.fault = true;
  } else {
    try {
      for (int sub = 0; sub < physics::kSubsteps; ++sub) {
        backend_->step(actions, 1, physics::kSimDt);
        max_actuation_ = std::max(max_actuation_, backend_->max_applied_actuation());
        substep_interactions(physics::kSimDt);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kSimulationBlowup && e.code() != ErrorCode::kInvalidState) throw;
      snap_.fault = true;
    }
  }
  snap_.step += 1;
  snap_.elapsed = snap_.step / physics::kPolicyHz;
  refresh_views();
  if (!snap_.fault) after_step();
  if (snap_.has_ball && !snap_.ball.kin.pos.allFinite()) snap_.fault = true;
  for (const auto& v : snap_.agents)
    if (!v.body.root().allFinite()) snap_.fault = true;

  reason_ = check_termination(cfg_, *skeleton_, snap_).value_or(TerminationReason::kNone);
  compute_rewards();
  update_summary();
  return done();
}

void Env::compute_rewards() {
  if (snap_.fault) {
    for (auto& r : rewards_) {
      r.clear();
      r.fault = true;
    }
    return;
  }
  const SportConfig& c = cfg_;
  const auto L = [&](const Vec3& p) { return snap_.local(p); };
  const auto D = [&](const Vec3& v) { return snap_.arena.dir_to_local(v); };
  const FreeObject& ball = snap_.ball;
  for (int a = 0; a < c.agents; ++a) {
    const AgentView& v = snap_.agents[a];
    rewards::RewardBreakdown* out = &rewards_[a];
    const Vec3 root = L(v.body.root());
    const Vec3 prev_root = L(v.prev_root);
    const Vec3 root_vel = D(v.body.lin_vel[0]);
    switch (c.sport) {
      case Sport::kHighJump:
        rewards::high_jump({root, prev_root, root_vel, L(snap_.targets[a])}, c.weights, out);
        break;
      case Sport::kLongJump:
        rewards::long_jump({root, prev_root, root_vel, L(snap_.targets[a])}, c.weights, out);
        break;
      case Sport::kHurdling:
        rewards::hurdling({root, prev_root, root_vel, L(snap_.targets[a])}, c.weights, out);
        break;
      case Sport::kGolf: {
        const Vec3 tl = snap_.terrain.frame.to_local(ball.kin.pos);
        rewards::GolfInput in{L(ball.kin.pos), L(snap_.prev_ball), D(ball.kin.lin_vel),
                              L(v.implement), L(snap_.targets[a]),
                              snap_.terrain.height(tl.x(), tl.y()), v.latched,
                              c.golf_pred_to_ball ? rewards::GolfPredictionMode::kToBall
                                                  : rewards::GolfPredictionMode::kToTarget};
        rewards::golf(in, c.weights, out);
        break;
      }
      case Sport::kJavelin: {
        const Quat q = Quat(Eigen::AngleAxisd(-snap_.arena.yaw, Vec3::UnitZ())) * ball.kin.orient;
        rewards::JavelinInput in{snap_.elapsed, L(v.wrist), L(ball.kin.pos), q,
                                 L(snap_.prev_ball), root, L(snap_.start), 0.0};
        rewards::javelin(in, c.weights, out);
        break;
      }
      case Sport::kTennis:
      case Sport::kTableTennis: {
        rewards::RacketInput in{L(v.implement), L(ball.kin.pos), D(ball.kin.lin_vel),
                                xy(L(snap_.targets[a])), v.latched, match_.hits[a]};
        if (c.sport == Sport::kTennis)
          rewards::tennis(in, c.weights, out);
        else
          rewards::table_tennis(in, c.weights, out);
        break;
      }
      case Sport::kFencing:
      case Sport::kBoxing: {
        const AgentView& opp = snap_.agents[1 - a];
        rewards::CombatInput in{root, wrap_angle(v.heading - snap_.arena.yaw), root_vel,
                                L(opp.body.root()), L(v.implement), {}, v.point};
        for (int k = 0; k < rewards::kCombatTargets; ++k)
          in.targets[k] = L(opp.body.joint_pos[combat_targets_[k]]);
        if (c.sport == Sport::kFencing)
          rewards::fencing(in, c.weights, out);
        else
          rewards::boxing(in, c.weights, out);
        break;
      }
      case Sport::kPenaltyKick: {
        rewards::KickInput in{root, prev_root, L(ball.kin.pos), L(snap_.prev_ball),
                              D(ball.kin.lin_vel), L(snap_.targets[a]),
                              xy(L(snap_.ball_spawn)), Vec2(1.0, 0.0)};
        rewards::penalty_kick(in, c.weights, out);
        break;
      }
      case Sport::kSoccer: {
        rewards::MatchInput in{root, prev_root, L(ball.kin.pos), L(snap_.prev_ball),
                               D(ball.kin.lin_vel), L(snap_.targets[a]),
                               match_.point_event[v.team]};
        rewards::soccer_match(in, c.weights, out);
        break;
      }
      case Sport::kFreeThrow: {
        rewards::FreeThrowInput in{L(ball.kin.pos), D(ball.kin.lin_vel), L(snap_.targets[a]),
                                   snap_.basket,
                                   c.literal_throw_velocity
                                       ? ballistics::ThrowVelocityMode::kLiteral
                                       : ballistics::ThrowVelocityMode::kPassThrough};
        rewards::free_throw(in, c.weights, out);
        break;
      }
    }
  }
}

void Env::update_summary() {
  summary_.steps = snap_.step;
  summary_.elapsed = snap_.elapsed;
  summary_.return_sum += rewards_[0].total();
  if (!done()) return;
  const Arena& A = cfg_.arena;
  summary_.reason = reason_;
  const Vec3 start = snap_.local(snap_.start);
  switch (cfg_.sport) {
    case Sport::kHighJump:
      summary_.level = snap_.bar_height;
      summary_.success = snap_.bar_cleared;
      if (snap_.bar_cleared) summary_.distance = snap_.window_max_z;
      break;
    case Sport::kLongJump:
      summary_.success = snap_.landed;
      if (snap_.landed) summary_.distance = snap_.local(snap_.landing).x() - A.long_jump_line;
      break;
    case Sport::kHurdling: {
      double sum = 0.0;
      for (double h : snap_.hurdle_heights) sum += h;
      summary_.level = snap_.hurdle_heights.empty() ? 0.0 : sum / snap_.hurdle_heights.size();
      summary_.success = reason_ == TerminationReason::kTaskComplete;
      summary_.distance = snap_.max_travel - start.x();
      break;
    }
    case Sport::kGolf: {
      const bool hit = snap_.agents[0].latched;
      summary_.contact = hit;
      summary_.success = hit && snap_.landed;
      if (hit) {
        const Vec3 rest = snap_.landed ? snap_.landing : snap_.ball.kin.pos;
        summary_.error_distance = (xy(rest) - xy(snap_.targets[0])).norm();
        summary_.distance = (xy(rest) - xy(snap_.ball_spawn)).norm();
      }
      break;
    }
    case Sport::kJavelin:
      summary_.success = snap_.landed;
      if (snap_.landed) summary_.distance = snap_.local(snap_.landing).x() - start.x();
      break;
    case Sport::kTennis:
    case Sport::kTableTennis:
      summary_.hits = total_hits_[0];
      summary_.success = total_hits_[0] >= 1;
      if (error_count_ > 0) summary_.error_distance = error_sum_ / error_count_;
      break;
    case Sport::kFencing:
    case Sport::kBoxing:
    case Sport::kSoccer:
      summary_.hits = match_.score[0];
      summary_.success = match_.score[0] > match_.score[1];
      break;
    case Sport::kPenaltyKick:
      summary_.success = reason_ == TerminationReason::kPointScored;
      if (snap_.goal_plane_crossed) {
        const Vec3 d = snap_.local(snap_.goal_crossing) - snap_.local(snap_.targets[0]);
        summary_.error_distance = std::hypot(d.y(), d.z());
      }
      break;
    case Sport::kFreeThrow:
      summary_.success = snap_.basket;
      if (snap_.goal_plane_crossed)
        summary_.error_distance = (xy(snap_.goal_crossing) - xy(snap_.targets[0])).norm();
      break;
  }
}

void Env::observe(float* out) const {
  const int prop = prop_dim();
  for (int a = 0; a < cfg_.agents; ++a) {
    const AgentView& v = snap_.agents[a];
    float* row = out + static_cast<size_t>(a) * obs_dim();
    heading_normalize_into(v.body, v.heading, &scratch_);
    scratch_.flatten(row);
    assemble_goal_obs(cfg_, *skeleton_, snap_, a, row + prop);
  }
}

}  // namespace sportsim::envs
