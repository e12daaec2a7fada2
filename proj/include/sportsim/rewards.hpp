#pragma once

// Reward kernels. Every kernel is a pure function of world-frame inputs and
// returns a breakdown of unweighted terms, the weights applied this step and
// their weighted total.

#include <array>
#include <string_view>

#include "sportsim/ballistics.hpp"
#include "sportsim/math.hpp"

namespace sportsim::rewards {

struct RewardTerm {
  std::string_view name;
  double value = 0.0;
  double weight = 0.0;
};

class RewardBreakdown {
 public:
  static constexpr int kMaxTerms = 6;

  void clear() {
    count_ = 0;
    total_ = 0.0;
    branch = 0;
    fault = false;
  }
  void add(std::string_view name, double value, double weight) {
    terms_[count_++] = {name, value, weight};
  }
  // total = sum of weight * value, accumulated in term order.
  void finalize() {
    total_ = 0.0;
    for (int i = 0; i < count_; ++i) total_ += terms_[i].weight * terms_[i].value;
  }

  int size() const { return count_; }
  const RewardTerm& operator[](int i) const { return terms_[i]; }
  double total() const { return total_; }
  // Throws kConfiguration for unknown names.
  double value(std::string_view name) const;
  double weight(std::string_view name) const;

  int branch = 0;      // index of the piecewise case that was active
  bool fault = false;  // kernel could not be evaluated; total forced to 0

 private:
  std::array<RewardTerm, kMaxTerms> terms_{};
  int count_ = 0;
  double total_ = 0.0;
};

// Named weight slots per kernel. Piecewise kernels list one slot per
// (term, case) pair so every coefficient can be overridden.
inline constexpr int kMaxWeights = 8;
using Weights = std::array<double, kMaxWeights>;

enum class Kernel {
  kHighJump,
  kLongJump,
  kHurdling,
  kGolf,
  kJavelin,
  kTennis,
  kTableTennis,
  kFencing,
  kBoxing,
  kPenaltyKick,
  kSoccerMatch,
  kFreeThrow,
};

struct KernelInfo {
  std::string_view name;
  int weight_count;
  std::array<std::string_view, kMaxWeights> weight_names;
  Weights defaults;
};

const KernelInfo& kernel_info(Kernel k);
// Index of a weight slot by name, -1 when absent.
int weight_slot(Kernel k, std::string_view name);

inline const Vec3 kHighJumpGoal{22.0, 6.0, 1.0};
inline const Vec3 kLongJumpGoal{30.0, 0.0, 1.0};

struct TrackInput {
  Vec3 root;
  Vec3 prev_root;
  Vec3 root_vel = Vec3::Zero();
  Vec3 goal;
};

void high_jump(const TrackInput& in, const Weights& w, RewardBreakdown* out);
void long_jump(const TrackInput& in, const Weights& w, RewardBreakdown* out);
void hurdling(const TrackInput& in, const Weights& w, RewardBreakdown* out);

enum class GolfPredictionMode {
  kToTarget,    // predicted landing vs target
  kToBall,      // predicted landing vs current ball x-y
};

struct GolfInput {
  Vec3 ball;
  Vec3 prev_ball;
  Vec3 ball_vel;
  Vec3 club;
  Vec3 target;
  double ground_z = 0.0;  // terrain height under the ball
  bool contact_latched = false;
  GolfPredictionMode mode = GolfPredictionMode::kToTarget;
};
void golf(const GolfInput& in, const Weights& w, RewardBreakdown* out);

struct JavelinInput {
  double t = 0.0;  // seconds since episode start
  Vec3 hand;
  Vec3 javelin;
  Quat javelin_orient = Quat::Identity();
  Vec3 prev_javelin;
  Vec3 root;
  Vec3 root_start;
  double forward_yaw = 0.0;  // throwing direction
};
inline constexpr double kJavelinTilt = kPi / 6.0;
// Default javelin pose: body x axis along the throwing direction, pitched up.
Rot6 javelin_default_pose(double forward_yaw);
void javelin(const JavelinInput& in, const Weights& w, RewardBreakdown* out);

inline constexpr double kTableHeight = 0.76;

struct RacketInput {
  Vec3 racket;
  Vec3 ball;
  Vec3 ball_vel;
  Vec2 target;
  bool contact_latched = false;
  int hits = 0;  // table tennis only
};
void tennis(const RacketInput& in, const Weights& w, RewardBreakdown* out);
void table_tennis(const RacketInput& in, const Weights& w, RewardBreakdown* out);

inline constexpr int kCombatTargets = 5;
inline constexpr double kPointDistance = 0.1;
inline constexpr double kPointForce = 50.0;

struct CombatInput {
  Vec3 root;
  double heading = 0.0;
  Vec3 root_vel;
  Vec3 opp_root;
  Vec3 striker;  // sword tip or hand
  std::array<Vec3, kCombatTargets> targets;
  bool point = false;
};
// Point condition shared by fencing and boxing.
bool point_condition(double min_distance, double force);
void fencing(const CombatInput& in, const Weights& w, RewardBreakdown* out);
void boxing(const CombatInput& in, const Weights& w, RewardBreakdown* out);

struct KickInput {
  Vec3 root;
  Vec3 prev_root;
  Vec3 ball;
  Vec3 prev_ball;
  Vec3 ball_vel;
  Vec3 target;
  Vec2 ball_spawn;
  Vec2 attack_dir;  // unit, toward the goal
};
void penalty_kick(const KickInput& in, const Weights& w, RewardBreakdown* out);

struct MatchInput {
  Vec3 root;
  Vec3 prev_root;
  Vec3 ball;
  Vec3 prev_ball;
  Vec3 ball_vel;
  Vec3 target;  // centre of the goal being attacked
  int scored = 0;  // +1 own team scored, -1 conceded, 0 otherwise
};
inline constexpr double kBallGate = 0.5;
void soccer_match(const MatchInput& in, const Weights& w, RewardBreakdown* out);

struct FreeThrowInput {
  Vec3 ball;
  Vec3 ball_vel;
  Vec3 hoop;
  bool basket = false;
  ballistics::ThrowVelocityMode mode = ballistics::ThrowVelocityMode::kPassThrough;
};
void free_throw(const FreeThrowInput& in, const Weights& w, RewardBreakdown* out);

// Shared shaping helpers (exposed for tests and environment cards).
inline constexpr double kSpeedScale = 1.5;
double velocity_alignment(const Vec2& vel, const Vec2& dir);
double progress(const Vec3& prev, const Vec3& cur, const Vec3& goal);

}  // namespace sportsim::rewards
