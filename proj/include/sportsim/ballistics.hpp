#pragma once

// Drag-free projectile predictors used as dense-reward ingredients.

#include <optional>
#include <vector>

#include "sportsim/math.hpp"

namespace sportsim::ballistics {

struct LaunchState {
  Vec3 p0 = Vec3::Zero();
  Vec3 v0 = Vec3::Zero();
  double gravity = kGravity;  // positive magnitude

  void validate() const;
};

// Landing x-y on the plane z = 0. Requires z0 >= 0 (kDomain otherwise).
Vec2 predict_land_ground(const LaunchState& launch);

// Landing x-y at the descending crossing of the plane z = h (the larger root).
// Throws kNoSolution when the trajectory never reaches h at or after t = 0.
Vec2 predict_land_height(const LaunchState& launch, double h);

// Flight time to the descending crossing of z = h, same error contract.
double time_to_height(const LaunchState& launch, double h);

// As predict_land_height, but nullopt instead of kNoSolution. Used on
// per-step paths where a missing crossing is routine.
std::optional<Vec2> try_land_height(const LaunchState& launch, double h);

enum class ThrowVelocityMode {
  // Vertical component chosen so the trajectory passes through the goal.
  kPassThrough,
  // v_z = ((p_ball - p_goal)_z + g T^2 / 2) / T. Misses the goal unless it is level.
  kLiteral,
};

// Launch velocity that carries a ball from p_ball to p_goal. Flight time is
// T = sqrt(2 |dz| / g); when the goal is level with the ball the flight time
// of a 45 degree launch over the same range, sqrt(2 |dxy| / g), is used.
// Throws kDegenerateTarget when the two points coincide.
Vec3 desired_throw_velocity(const Vec3& p_ball, const Vec3& p_goal, double g = kGravity,
                            ThrowVelocityMode mode = ThrowVelocityMode::kPassThrough);
double desired_flight_time(const Vec3& p_ball, const Vec3& p_goal, double g = kGravity);

struct FlightSample {
  double t;
  Vec3 pos;
  Vec3 vel;
};

// Classic RK4 integration of x'' = (0, 0, -g). Returns steps + 1 samples
// starting with the launch state. Intended as a test oracle, not for the
// per-step hot path.
std::vector<FlightSample> integrate_flight(const LaunchState& launch, double dt, int steps);

}  // namespace sportsim::ballistics
