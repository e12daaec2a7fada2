#pragma once

// Scripted and random action sources for smoke runs, evaluation and
// benchmarks. Scripted policies read the environment snapshot directly; they
// exist to drive reward and termination paths, not to play well.

#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "sportsim/envs.hpp"

namespace sportsim::policies {

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string_view name() const = 0;
  // Writes agents() * action_dim() values for the environment's next step.
  // `trial` is the global trial index the environment is running.
  virtual void act(const envs::Env& env, std::uint64_t trial, float* out) const = 0;
};

// Names: zero, random, straight_runner, ball_chaser, fixed_swing, thrower.
// `seed` only affects the random policy. Throws kConfiguration otherwise.
std::unique_ptr<Policy> make_policy(std::string_view name, std::uint64_t seed = 0);
const std::vector<std::string_view>& policy_names();

// First action channel owned by an actuated joint.
inline int channel(int joint) { return 3 * (joint - 1); }

}  // namespace sportsim::policies
