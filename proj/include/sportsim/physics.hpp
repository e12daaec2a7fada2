#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sportsim/core.hpp"

namespace sportsim::physics {

inline constexpr double kSimHz = 60.0;
inline constexpr double kPolicyHz = 30.0;
inline constexpr double kSimDt = 1.0 / kSimHz;
inline constexpr double kPolicyDt = 1.0 / kPolicyHz;
inline constexpr int kSubsteps = 2;
inline constexpr double kActuationCap = 500.0;

enum class ShapeKind : std::uint8_t { kSphere, kCapsule, kBox };

struct Shape {
  ShapeKind kind = ShapeKind::kSphere;
  double radius = 0.0;       // sphere, capsule
  double half_length = 0.0;  // capsule, along the body x axis
  Vec3 half_extents = Vec3::Zero();  // box

  static Shape sphere(double r) { return {ShapeKind::kSphere, r, 0.0, Vec3::Zero()}; }
  static Shape capsule(double r, double half_len) {
    return {ShapeKind::kCapsule, r, half_len, Vec3::Zero()};
  }
  static Shape box(const Vec3& half) { return {ShapeKind::kBox, 0.0, 0.0, half}; }

  // Radius used for contact against static geometry.
  double contact_radius() const;
};

struct ObjectSpec {
  Shape shape;
  double mass = 1.0;
  double restitution = 0.5;
  double friction = 0.3;

  void validate() const;
};

struct FreeObject {
  ObjectSpec spec;
  ObjectKinematics kin;
  // Kinematically attached objects (held balls, a gripped javelin) are moved
  // by their owner and skipped by step_objects.
  bool attached = false;
};

// Procedural wave terrain: h(x, y) = A/2 (sin(k x + px) + sin(k y + py)),
// k = 2 pi / wavelength, evaluated in the terrain's own planar frame.
struct Terrain {
  double amplitude = 0.5;
  double wavelength = 8.0;
  double phase_x = 0.0;
  double phase_y = 0.0;
  PlanarFrame frame;

  double height(double x, double y) const;
  Vec2 gradient(double x, double y) const;
  // rows x cols heights sampled on a grid centred at `center`, aligned with
  // `yaw`, relative to `reference_z`. Row-major, rows along local x.
  void sample_patch(const Vec3& center, double yaw, double spacing, int rows, int cols,
                    double reference_z, float* out) const;
  // Binary row-major float32 grid covering [x0, x0 + (cols-1) s] x [y0, ...].
  void export_grid(const std::string& path, double x0, double y0, double spacing, int rows,
                   int cols) const;
};

struct StaticBox {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Zero();
  double yaw = 0.0;
  int tag = 0;  // sport-specific meaning (table, net, bar, ...)
  bool solid = true;  // non-solid boxes only report overlap
};

struct StaticGeometry {
  bool ground = true;
  const Terrain* terrain = nullptr;  // replaces the flat ground when set
  std::vector<StaticBox> boxes;
};

inline constexpr int kGroundContact = -1;
inline constexpr int kTerrainContact = -2;

struct ContactEvent {
  int geometry = 0;  // kGroundContact, kTerrainContact or a box index
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::Zero();
  double force = 0.0;  // impulse / dt
};

struct ObjectContacts {
  static constexpr int kMaxEvents = 4;
  std::array<ContactEvent, kMaxEvents> events;
  int count = 0;

  void clear() { count = 0; }
  void add(const ContactEvent& e) {
    if (count < kMaxEvents) events[count++] = e;
  }
  bool touched(int geometry) const {
    for (int i = 0; i < count; ++i)
      if (events[i].geometry == geometry) return true;
    return false;
  }
};

// Advances free objects by dt under gravity with exact constant-acceleration
// updates. Ground impacts are resolved at the time of impact; boxes and
// terrain are resolved on overlap. Normal restitution v_n+ = -e v_n-, with a
// Coulomb cap on the tangential velocity change. Throws kSimulationBlowup when
// an object penetrates by more than ten times its contact radius.
void step_objects(std::span<FreeObject> objects, double dt, const StaticGeometry& geometry,
                  std::span<ObjectContacts> contacts, double gravity = kGravity);

double mechanical_energy(const FreeObject& obj, double gravity = kGravity);

// Contact between a free sphere and a moving kinematic body (implement or
// limb). Both shapes are treated as infinitely massive on the kinematic side.
// Returns the impulse/dt force applied to the object, 0 when separated.
struct KinematicSphere {
  Vec3 center;
  double radius;
  Vec3 velocity;
};
struct KinematicDisc {
  Vec3 center;
  Vec3 normal;  // unit
  double radius;
  Vec3 velocity;
};
struct KinematicBox {
  Vec3 center;
  Vec3 half_extents;
  double yaw;
  Vec3 velocity;
};

bool overlaps(const FreeObject& obj, const KinematicSphere& s);
bool overlaps(const FreeObject& obj, const KinematicDisc& d);
bool overlaps(const FreeObject& obj, const KinematicBox& b);

double resolve_contact(FreeObject& obj, const KinematicSphere& s, double restitution, double dt);
double resolve_contact(FreeObject& obj, const KinematicDisc& d, double restitution, double dt);
double resolve_contact(FreeObject& obj, const KinematicBox& b, double restitution, double dt);

// Humanoid dynamics behind a narrow interface so other backends can be
// plugged in. Actions are agent-major blocks of action_dim target signals.
class DynamicsBackend {
 public:
  virtual ~DynamicsBackend() = default;

  virtual const SkeletonSpec& skeleton() const = 0;
  virtual int agents() const = 0;
  virtual void reset(std::span<const BodyState> initial) = 0;
  virtual void step(std::span<const float> actions, int substeps, double dt) = 0;
  virtual const BodyState& state(int agent) const = 0;
  virtual double heading(int agent) const { return yaw_of(state(agent)); }
  // Largest |actuation| applied during the most recent step call.
  virtual double max_applied_actuation() const = 0;
  virtual double actuation_cap() const { return kActuationCap; }
  // Grip channel state for implements/balls held in the right hand.
  virtual bool gripping(int agent) const = 0;
};

struct ProxyParams {
  double max_speed = 9.5;         // m/s, planar target at |action| = 1
  double planar_accel = 14.0;     // m/s^2 at full actuation
  double air_control = 0.2;
  double max_yaw_rate = 6.0;      // rad/s
  double yaw_accel = 40.0;        // rad/s^2
  double jump_speed = 6.0;        // m/s
  double vertical_accel = 45.0;   // m/s^2
  double leg_extension = 0.3;     // m above stand height while still supported
  double min_root_height = 0.1;
  double hand_reach = 0.7;        // m marker offset at |action| = 1
  double foot_reach = 0.5;
  double head_reach = 0.2;
  double hand_accel = 150.0;
  double foot_accel = 120.0;
  double head_accel = 30.0;
  double marker_stiffness = 5000.0;  // actuation per metre of marker error
  double marker_damping = 350.0;     // actuation per m/s
  double velocity_gain = 500.0;      // actuation per m/s of velocity error
  double cap = kActuationCap;
};

// Reduced humanoid: a velocity-controlled root capsule carrying the full joint
// layout at rest offsets, with PD-tracked end-effector markers (head, wrists,
// feet). Channel map (actuated joint j owns channels 3(j-1) .. 3(j-1)+2):
//   L_Hip:   forward / lateral root velocity target, vertical (jump > 0, crouch < 0)
//   R_Hip:   yaw-rate target (channel 0)
//   head, wrists, feet: marker offset targets in the heading frame
//   grip joint: channel 0 >= 0 keeps the right-hand grip closed
// Every channel's actuation is clamped to the cap before conversion to
// acceleration.
class ProxyBackend final : public DynamicsBackend {
 public:
  ProxyBackend(const SkeletonSpec& skeleton, int agents, ProxyParams params = {});

  const SkeletonSpec& skeleton() const override { return skeleton_; }
  int agents() const override { return static_cast<int>(agents_.size()); }
  void reset(std::span<const BodyState> initial) override;
  void step(std::span<const float> actions, int substeps, double dt) override;
  const BodyState& state(int agent) const override { return agents_[agent].body; }
  double heading(int agent) const override { return agents_[agent].yaw; }
  double max_applied_actuation() const override { return max_actuation_; }
  double actuation_cap() const override { return params_.cap; }
  bool gripping(int agent) const override { return agents_[agent].grip; }

  const ProxyParams& params() const { return params_; }
  bool grounded(int agent) const;
  // World velocity of a marker (end-effector) joint.
  Vec3 joint_velocity(int agent, int joint) const { return agents_[agent].body.lin_vel[joint]; }

  // Direct pose placement used by resets.
  void place(int agent, const Vec3& root, double yaw);

 private:
  enum Marker { kHead, kLeftHand, kRightHand, kLeftFoot, kRightFoot, kMarkerCount };

  struct AgentState {
    Vec3 root = Vec3::Zero();
    Vec3 root_vel = Vec3::Zero();
    double yaw = 0.0;
    double yaw_rate = 0.0;
    std::array<Vec3, kMarkerCount> offset{};      // delta from rest, heading frame
    std::array<Vec3, kMarkerCount> offset_vel{};
    bool airborne = false;
    bool grip = true;
    BodyState body;
  };

  double actuate(double demand);
  void integrate(AgentState& a, std::span<const float> act, double dt);
  void rebuild_body(AgentState& a) const;

  SkeletonSpec skeleton_;
  ProxyParams params_;
  std::vector<AgentState> agents_;
  std::array<int, kMarkerCount> marker_joint_{};
  // Per joint: which marker it follows and with what weight.
  std::vector<int> follow_marker_;
  std::vector<double> follow_weight_;
  int ch_planar_ = 0;
  int ch_yaw_ = 0;
  int ch_grip_ = -1;
  std::array<int, kMarkerCount> ch_marker_{};
  double max_actuation_ = 0.0;
};

// Validates an action block: correct length and finite values. Throws
// kInvalidAction.
void validate_actions(std::span<const float> actions, int agents, int action_dim);

}  // namespace sportsim::physics
