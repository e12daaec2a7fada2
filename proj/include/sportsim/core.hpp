#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sportsim/error.hpp"
#include "sportsim/math.hpp"

namespace sportsim {

struct EndEffectors {
  int head = -1;
  int left_hand = -1;
  int right_hand = -1;
  int left_foot = -1;
  int right_foot = -1;
};

// Kinematic layout of a humanoid. Joint 0 is always the root (pelvis).
//
// rest_offsets are root-relative joint positions in the heading frame
// (x forward, y left, z up) used by the proxy backend; they are not part of
// the observation contract.
struct SkeletonSpec {
  std::string name;
  int joint_count = 0;
  int actuated_count = 0;
  int action_dim = 0;
  std::vector<std::string> body_names;
  std::vector<Vec3> rest_offsets;
  EndEffectors end_effectors;
  int grip_joint = -1;
  double stand_height = 0.93;

  // Throws kConfiguration when a count or index invariant is broken.
  void validate() const;

  // Returns -1 when absent.
  int index_of(std::string_view body) const;
  int require(std::string_view body) const;
};

// 24 joints / 23 actuated / 69 action channels.
const SkeletonSpec& smpl_skeleton();
// 52 joints / 51 actuated / 153 action channels (22 body joints + 2x15 finger joints).
const SkeletonSpec& smplx_skeleton();

// Key-value document (JSON object) with keys name, joint_count,
// actuated_count, action_dim, body_names, end_effectors{...}, and optional
// rest_offsets, grip_joint, stand_height.
SkeletonSpec load_skeleton(std::string_view json_text);
std::string skeleton_to_json(const SkeletonSpec& spec);

// One agent's joint kinematics: rotations (6-DoF), world positions, angular
// and linear velocities, all indexed by joint.
struct BodyState {
  std::vector<Rot6> joint_rot;
  std::vector<Vec3> joint_pos;
  std::vector<Vec3> ang_vel;
  std::vector<Vec3> lin_vel;

  BodyState() = default;
  explicit BodyState(int joints)
      : joint_rot(joints, rot6_identity()),
        joint_pos(joints, Vec3::Zero()),
        ang_vel(joints, Vec3::Zero()),
        lin_vel(joints, Vec3::Zero()) {}

  int joints() const { return static_cast<int>(joint_pos.size()); }
  const Vec3& root() const { return joint_pos[0]; }

  // Throws kInvalidState on length mismatch or non-finite values.
  void validate(int expected_joints) const;

  // Values per joint in the flattened proprioceptive layout.
  static constexpr int kValuesPerJoint = 15;
  int flat_size() const { return joints() * kValuesPerJoint; }
  // Layout: [rot J*6][pos J*3][ang_vel J*3][lin_vel J*3].
  void flatten(float* out) const;
};

struct ObjectKinematics {
  Vec3 pos = Vec3::Zero();
  Quat orient = Quat::Identity();
  Vec3 lin_vel = Vec3::Zero();
  Vec3 ang_vel = Vec3::Zero();

  void validate() const;
  // (pos, quat w x y z, lin_vel, ang_vel)
  std::array<double, 13> to_array() const;
};

struct ArenaBounds {
  Vec2 min_xy = Vec2::Zero();
  Vec2 max_xy = Vec2::Zero();

  ArenaBounds() = default;
  ArenaBounds(Vec2 lo, Vec2 hi);

  bool contains(const Vec2& p) const {
    return p.x() >= min_xy.x() && p.x() <= max_xy.x() && p.y() >= min_xy.y() &&
           p.y() <= max_xy.y();
  }
};

// Per-body contact forces plus named pair flags. A pair flag is either
// transient (cleared at the start of every control step) or sticky (latched
// until the episode resets).
class ContactSet {
 public:
  struct Pair {
    std::string name;
    bool sticky = false;
    bool active = false;
    bool latched = false;
    double force = 0.0;
  };

  ContactSet() = default;
  explicit ContactSet(int joints) : body_forces_(joints, Vec3::Zero()) {}

  int register_pair(std::string name, bool sticky);
  // Throws kConfiguration for unknown names.
  int pair_index(std::string_view name) const;

  void mark(int pair, double force);
  bool active(int pair) const { return pairs_[pair].active; }
  bool latched(int pair) const { return pairs_[pair].latched; }
  double force(int pair) const { return pairs_[pair].force; }
  const std::vector<Pair>& pairs() const { return pairs_; }

  std::vector<Vec3>& body_forces() { return body_forces_; }
  const std::vector<Vec3>& body_forces() const { return body_forces_; }

  // Clears transient state (forces, non-latched flags) ahead of a control step.
  void begin_step();
  // Clears everything including latches.
  void reset();

  // Per-body squared force norms, J values.
  void squared_norms(float* out) const;

 private:
  std::vector<Vec3> body_forces_;
  std::vector<Pair> pairs_;
};

// Expresses a state in the frame rotated by -reference_yaw about world z and
// translated so the root's x-y is the origin. Root z is preserved.
BodyState heading_normalize(const BodyState& state, double reference_yaw);
void heading_normalize_into(const BodyState& state, double reference_yaw,
                            BodyState* out);

// Heading of the root rotation (z of a ZYX Euler decomposition) in (-pi, pi].
double yaw_of(const BodyState& state);
double yaw_of(const Rot6& rot);

}  // namespace sportsim
