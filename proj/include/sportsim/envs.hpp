#pragma once

// Sport environments composed over the physics backend and reward kernels.
//
// A Snapshot is the complete world state an environment exposes after each
// control step. Observation assembly and termination rules are pure
// functions of a Snapshot, so tests can build one by hand and probe every
// rule without running the simulator.

#include <array>
#include <condition_variable>
#include <cstdint>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "sportsim/config.hpp"
#include "sportsim/core.hpp"
#include "sportsim/physics.hpp"
#include "sportsim/rewards.hpp"
#include "sportsim/rng.hpp"

namespace sportsim::envs {

enum class TerminationReason : std::uint8_t {
  kNone,  // storage sentinel, never reported for a terminated episode
  kFall,
  kBarContact,
  kBarNotCleared,
  kOutOfBounds,
  kOffTrack,
  kBallBackward,
  kNoContactTimeout,
  kBallTooCloseToBody,
  kLostPoint,
  kJavelinDetached,
  kJavelinPoseDeviation,
  kJavelinNotReleased,
  kPointScored,
  kTaskComplete,
  kTimeLimit,
  kSimulationFault,
};

const char* to_string(TerminationReason r);

// Ordered rule list for a sport; the first rule that fires wins.
std::span<const TerminationReason> termination_rules(Sport sport);

struct MatchState {
  std::array<int, 2> score{};
  int serving = 0;             // side that put the current ball in play
  std::array<int, 2> hits{};   // legal returns this point (N_hit)
  std::array<int, 2> point_event{};  // per side this step: +1 scored, -1 conceded
  int receiver = 0;            // racket sports: side expected to strike next
  int last_hitter = -1;        // -1 for the launcher
  int bounces = 0;             // bounces since the last strike or launch

  void begin_step() { point_event = {0, 0}; }
  // Awards a point to `side`: score, events and N_hit reset.
  void award(int side);
};

struct AgentView {
  BodyState body;  // world frame
  double heading = 0.0;
  Vec3 prev_root = Vec3::Zero();
  bool grounded = true;
  int team = 0;
  // Implement centre (racket, paddle, sword tip, glove, club head); the right
  // wrist when the sport has none.
  Vec3 implement = Vec3::Zero();
  Vec3 implement_vel = Vec3::Zero();
  Vec3 wrist = Vec3::Zero();
  ContactSet contacts;
  bool latched = false;  // C_cb / C_rb for this agent
  bool point = false;    // combat point this step
};

struct Snapshot {
  Sport sport = Sport::kHighJump;
  PlanarFrame arena;  // arena-local -> world
  int step = 0;
  double elapsed = 0.0;
  bool fault = false;
  std::vector<AgentView> agents;

  bool has_ball = false;
  physics::FreeObject ball;  // ball, javelin
  Vec3 prev_ball = Vec3::Zero();
  Vec3 ball_spawn = Vec3::Zero();
  std::vector<Vec3> targets;  // per agent goal target, world frame

  Vec3 start = Vec3::Zero();  // agent 0 spawn root, world frame
  double max_travel = 0.0;    // furthest arena-local root x reached by agent 0

  physics::Terrain terrain;
  std::vector<double> hurdle_heights;
  double bar_height = 0.0;

  // High jump
  double window_max_z = 0.0;
  bool bar_crossed = false;
  bool bar_cleared = false;
  // Long jump, javelin, golf
  bool took_off = false;
  bool landed = false;
  Vec3 landing = Vec3::Zero();
  // Javelin, free throw
  bool released = false;
  double release_time = 0.0;
  bool ball_grounded = false;  // touched the ground after release
  // Racket sports
  bool lost_point = false;
  int loser = -1;
  // Soccer, free throw
  bool goal = false;
  int scoring_team = -1;
  bool ball_out = false;
  bool goal_plane_crossed = false;
  Vec3 goal_crossing = Vec3::Zero();
  bool basket = false;

  Vec3 local(const Vec3& world) const { return arena.to_local(world); }
};

// Fall predicate: root below 0.15 m or head / torso touching the ground.
bool fallen(const AgentView& agent, const SkeletonSpec& skeleton);

// Evaluates the sport's rules in order against a snapshot.
std::optional<TerminationReason> check_termination(const SportConfig& cfg,
                                                    const SkeletonSpec& skeleton,
                                                    const Snapshot& snap);

// Layout of one agent's observation: proprioception followed by the goal
// state. All quantities are expressed in the agent's heading frame.
struct ObsSegment {
  std::string name;
  int size;
};
std::vector<ObsSegment> goal_layout(const SportConfig& cfg, const SkeletonSpec& skeleton);
int goal_dim(const SportConfig& cfg, const SkeletonSpec& skeleton);

// Writes goal_dim floats for `agent`. Throws kConfiguration when the snapshot
// lacks an entity the sport needs.
void assemble_goal_obs(const SportConfig& cfg, const SkeletonSpec& skeleton,
                       const Snapshot& snap, int agent, float* out);

// Ball kinematics helpers also used by the scripted policies.
Vec3 goal_center(const SportConfig& cfg, int team);

struct EpisodeSummary {
  Sport sport = Sport::kHighJump;
  std::uint64_t seed = 0;
  int steps = 0;
  double elapsed = 0.0;
  TerminationReason reason = TerminationReason::kNone;
  bool success = false;
  std::optional<double> distance;        // agent or object travel, m (height for high jump)
  std::optional<double> error_distance;  // m
  std::optional<int> hits;
  std::optional<bool> contact;           // golf club contact
  double level = 0.0;                    // curriculum level (bar height)
  double return_sum = 0.0;               // agent 0 reward sum
};

const SkeletonSpec& skeleton_for(const SportConfig& cfg);

class Env {
 public:
  explicit Env(SportConfig cfg);
  Env(const Env&) = delete;
  Env& operator=(const Env&) = delete;
  Env(Env&&) = default;

  const SportConfig& config() const { return cfg_; }
  const SkeletonSpec& skeleton() const { return *skeleton_; }
  int agents() const { return cfg_.agents; }
  int prop_dim() const { return skeleton_->joint_count * BodyState::kValuesPerJoint; }
  int goal_dim() const { return goal_dim_; }
  int obs_dim() const { return prop_dim() + goal_dim_; }
  int action_dim() const { return skeleton_->action_dim; }

  void reset(std::uint64_t seed);
  // Places the whole arena under a planar rigid transform from the next
  // reset on. Observations and rewards are invariant to it.
  void set_arena(const PlanarFrame& frame);
  // One control step (two physics substeps). Throws kInvalidAction on a
  // wrong-length block; non-finite values fault the episode instead.
  bool step(std::span<const float> actions);

  // agents() * obs_dim() floats.
  void observe(float* out) const;
  const rewards::RewardBreakdown& reward(int agent) const { return rewards_[agent]; }
  bool done() const { return reason_ != TerminationReason::kNone; }
  TerminationReason reason() const { return reason_; }
  const Snapshot& snapshot() const { return snap_; }
  const MatchState& match() const { return match_; }
  const EpisodeSummary& summary() const { return summary_; }
  std::uint64_t seed() const { return seed_; }
  const physics::ProxyBackend& backend() const { return *backend_; }
  double max_actuation() const { return max_actuation_; }

 private:
  void reset_sport();
  void place_agent(int agent, const Vec3& local_root, double local_yaw);
  void launch_racket_ball(int receiver, bool from_center);
  void racket_bounce(const Vec3& point, bool on_table);
  void racket_lose(int loser);
  void kickoff();
  void place_ball(const Vec3& local_pos);
  void substep_interactions(double dt);
  void after_step();
  void refresh_views();
  void compute_rewards();
  void update_summary();
  Vec3 world(const Vec3& local) const { return snap_.arena.to_world(local); }
  Vec3 world_dir(const Vec3& local) const { return snap_.arena.dir_to_world(local); }

  SportConfig cfg_;
  const SkeletonSpec* skeleton_;
  std::unique_ptr<physics::ProxyBackend> backend_;
  physics::StaticGeometry geometry_;
  std::vector<physics::StaticBox> local_boxes_;  // arena frame
  std::array<physics::ObjectContacts, 1> ball_contacts_{};
  int goal_dim_ = 0;
  Rng rng_;
  std::uint64_t seed_ = 0;
  Snapshot snap_;
  MatchState match_;
  std::vector<rewards::RewardBreakdown> rewards_;
  TerminationReason reason_ = TerminationReason::kNone;
  EpisodeSummary summary_;
  double error_sum_ = 0.0;  // racket sports: return landing errors
  int error_count_ = 0;
  std::array<int, 2> total_hits_{};
  std::vector<std::uint8_t> armed_;  // combat: striker left the target zone since its last point
  bool pending_kickoff_ = false;
  bool pending_ball_reset_ = false;
  double max_actuation_ = 0.0;
  mutable BodyState scratch_;
  // Cached joint indices
  int head_ = 0, lwrist_ = 0, rwrist_ = 0, lfoot_ = 0, rfoot_ = 0;
  std::array<int, rewards::kCombatTargets> combat_targets_{};
};

// Homogeneous batch of environments over flat arrays. Each slot runs trials
// drawn from a global trial counter; trial k always uses seed
// derive_seed(base_seed, k), so results do not depend on batch size, slot
// order or worker count.
class BatchEnv {
 public:
  BatchEnv(const SportConfig& cfg, int envs, int workers = 1);
  ~BatchEnv();
  BatchEnv(const BatchEnv&) = delete;
  BatchEnv& operator=(const BatchEnv&) = delete;

  int size() const { return static_cast<int>(envs_.size()); }
  int agents() const { return agents_; }
  int obs_dim() const { return obs_dim_; }
  int action_dim() const { return action_dim_; }
  int workers() const { return workers_; }

  // Resets slot i to trial first_trial + i and fills observations.
  void reset(std::uint64_t base_seed, std::uint64_t first_trial = 0);
  // Resets slot i to trials[i]; auto-reset continues after the largest one.
  void reset(std::uint64_t base_seed, std::span<const std::uint64_t> trials);
  // actions: size() * agents() * action_dim(). Auto-resets finished slots to
  // the next trial index; the observation for such a slot is the fresh reset.
  void step(std::span<const float> actions);

  std::span<const float> observations() const { return obs_; }
  std::span<const float> rewards() const { return rewards_; }   // size() * agents()
  std::span<const std::uint8_t> dones() const { return dones_; }  // size()
  // Termination reason and summary of the episode that ended in the last step.
  TerminationReason last_reason(int slot) const { return reasons_[slot]; }
  const EpisodeSummary& finished(int slot) const { return finished_[slot]; }
  std::uint64_t trial(int slot) const { return trials_[slot]; }
  const Env& env(int slot) const { return envs_[slot]; }
  // When false, finished slots stay done until reset_finished(); the
  // terminal observation and reward breakdown remain readable until then.
  void set_auto_reset(bool on) { auto_reset_ = on; }
  // Assigns the next trial indices, in slot order, to finished slots and
  // resets them. Returns the number of slots reset.
  int reset_finished();
  // Auto-reset stops handing out trials at this index; exhausted slots idle.
  void set_trial_limit(std::uint64_t limit) { trial_limit_ = limit; }
  std::uint64_t next_trial() const { return next_trial_; }
  bool idle(int slot) const { return idle_[slot] != 0; }
  std::uint64_t base_seed() const { return base_seed_; }

 private:
  enum class Phase { kStep, kReset };
  void run_range(Phase phase, int begin, int end);
  void parallel(Phase phase);
  void worker_loop(int w);
  void write_obs(int slot);

  SportConfig cfg_;
  std::vector<Env> envs_;
  int agents_, obs_dim_, action_dim_, workers_;
  std::uint64_t base_seed_ = 0;
  std::uint64_t next_trial_ = 0;
  std::uint64_t trial_limit_ = UINT64_MAX;
  bool auto_reset_ = true;
  std::vector<float> obs_;
  std::vector<float> rewards_;
  std::vector<std::uint8_t> dones_;
  std::vector<TerminationReason> reasons_;
  std::vector<EpisodeSummary> finished_;
  std::vector<std::uint64_t> trials_;
  std::vector<std::uint8_t> needs_reset_;
  std::vector<std::uint8_t> idle_;

  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable cv_start_, cv_done_;
  std::uint64_t generation_ = 0;
  int pending_ = 0;
  bool stop_ = false;
  std::span<const float> job_actions_;
  Phase job_phase_ = Phase::kStep;
  std::exception_ptr job_error_;
};

// Human-readable environment card: observation layout, action dim, reward
// terms and weights, termination rules.
std::string environment_card(const SportConfig& cfg);

}  // namespace sportsim::envs
