#include "sportsim/ballistics.hpp"

#include <cmath>
#include <optional>

#include "sportsim/error.hpp"

namespace sportsim::ballistics {

void LaunchState::validate() const {
  if (!p0.allFinite() || !v0.allFinite() || !std::isfinite(gravity))
    throw Error(ErrorCode::kInvalidState, "launch state is not finite");
  if (!(gravity > 0.0)) throw Error(ErrorCode::kDomain, "gravity magnitude must be positive");
}

namespace {

std::optional<double> descent_time(const LaunchState& launch, double h) {
  launch.validate();
  if (!std::isfinite(h)) throw Error(ErrorCode::kInvalidState, "plane height is not finite");
  const double g = launch.gravity;
  const double vz = launch.v0.z();
  const double disc = vz * vz + 2.0 * g * (launch.p0.z() - h);
  if (disc < 0.0) return std::nullopt;
  const double t = (vz + std::sqrt(disc)) / g;
  if (t < 0.0) return std::nullopt;
  return t;
}

}  // namespace

double time_to_height(const LaunchState& launch, double h) {
  const auto t = descent_time(launch, h);
  if (!t) throw Error(ErrorCode::kNoSolution, "trajectory does not descend through the plane");
  return *t;
}

Vec2 predict_land_height(const LaunchState& launch, double h) {
  const double t = time_to_height(launch, h);
  return {launch.p0.x() + launch.v0.x() * t, launch.p0.y() + launch.v0.y() * t};
}

std::optional<Vec2> try_land_height(const LaunchState& launch, double h) {
  const auto t = descent_time(launch, h);
  if (!t) return std::nullopt;
  return Vec2(launch.p0.x() + launch.v0.x() * *t, launch.p0.y() + launch.v0.y() * *t);
}

Vec2 predict_land_ground(const LaunchState& launch) {
  launch.validate();
  if (launch.p0.z() < 0.0) throw Error(ErrorCode::kDomain, "launch height below ground");
  return predict_land_height(launch, 0.0);
}

double desired_flight_time(const Vec3& p_ball, const Vec3& p_goal, double g) {
  if (!p_ball.allFinite() || !p_goal.allFinite() || !std::isfinite(g))
    throw Error(ErrorCode::kInvalidState, "throw endpoints are not finite");
  if (!(g > 0.0)) throw Error(ErrorCode::kDomain, "gravity magnitude must be positive");
  const Vec3 d = p_goal - p_ball;
  const double horizontal = std::hypot(d.x(), d.y());
  if (horizontal == 0.0 && d.z() == 0.0)
    throw Error(ErrorCode::kDegenerateTarget, "ball already at the goal");
  if (d.z() != 0.0) return std::sqrt(2.0 * std::abs(d.z()) / g);
  return std::sqrt(2.0 * horizontal / g);
}

Vec3 desired_throw_velocity(const Vec3& p_ball, const Vec3& p_goal, double g,
                            ThrowVelocityMode mode) {
  const double t = desired_flight_time(p_ball, p_goal, g);
  const Vec3 d = p_goal - p_ball;
  const double drop = 0.5 * g * t * t;
  const double vz = mode == ThrowVelocityMode::kPassThrough ? (d.z() + drop) / t
                                                             : (-d.z() + drop) / t;
  return {d.x() / t, d.y() / t, vz};
}

std::vector<FlightSample> integrate_flight(const LaunchState& launch, double dt, int steps) {
  launch.validate();
  if (!(dt > 0.0) || steps < 1) throw Error(ErrorCode::kDomain, "dt must be > 0 and steps >= 1");
  const Vec3 accel(0.0, 0.0, -launch.gravity);
  std::vector<FlightSample> out;
  out.reserve(static_cast<size_t>(steps) + 1);
  Vec3 p = launch.p0, v = launch.v0;
  out.push_back({0.0, p, v});
  for (int i = 0; i < steps; ++i) {
    // State derivative is (v, a); a is constant so the stages only differ in v.
    const Vec3 k1p = v, k1v = accel;
    const Vec3 k2p = v + 0.5 * dt * k1v, k2v = accel;
    const Vec3 k3p = v + 0.5 * dt * k2v, k3v = accel;
    const Vec3 k4p = v + dt * k3v, k4v = accel;
    p += dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    out.push_back({(i + 1) * dt, p, v});
  }
  return out;
}

}  // namespace sportsim::ballistics
