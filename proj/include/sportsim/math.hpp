#pragma once

// Small geometric helpers shared by every module. World frame is z-up,
// gravity along -z, SI units throughout.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace sportsim {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

inline constexpr double kGravity = 9.81;
inline constexpr double kPi = std::numbers::pi;

// 6-DoF rotation: the first two columns of the rotation matrix, stored
// column-major as (c1.x, c1.y, c1.z, c2.x, c2.y, c2.z).
using Rot6 = std::array<double, 6>;

inline Rot6 rot6_from_matrix(const Mat3& r) {
  return {r(0, 0), r(1, 0), r(2, 0), r(0, 1), r(1, 1), r(2, 1)};
}

inline Rot6 rot6_identity() { return {1, 0, 0, 0, 1, 0}; }

// Gram-Schmidt completion of the two stored columns. Returns false when either
// column is degenerate.
inline bool rot6_to_matrix(const Rot6& r6, Mat3* out) {
  Vec3 a(r6[0], r6[1], r6[2]);
  Vec3 b(r6[3], r6[4], r6[5]);
  const double na = a.norm();
  if (!(na > 1e-12) || !std::isfinite(na)) return false;
  Vec3 b1 = a / na;
  Vec3 b2 = b - b1.dot(b) * b1;
  const double nb = b2.norm();
  if (!(nb > 1e-12) || !std::isfinite(nb)) return false;
  b2 /= nb;
  out->col(0) = b1;
  out->col(1) = b2;
  out->col(2) = b1.cross(b2);
  return true;
}

inline Mat3 yaw_matrix(double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  Mat3 m;
  m << c, -s, 0, s, c, 0, 0, 0, 1;
  return m;
}

// Rotate a vector about +z by the given cosine/sine pair.
inline Vec3 rotate_z(const Vec3& v, double c, double s) {
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z()};
}

inline Vec3 rotate_z(const Vec3& v, double yaw) {
  return rotate_z(v, std::cos(yaw), std::sin(yaw));
}

// Wraps to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

inline double sq(double v) { return v * v; }

inline Vec2 xy(const Vec3& v) { return {v.x(), v.y()}; }

inline bool all_finite(const Vec3& v) { return v.allFinite(); }

// Planar rigid transform: rotation about z followed by an x-y translation.
// Used to express arena-local coordinates in the world and to build the
// equivariance checks.
struct PlanarFrame {
  double yaw = 0.0;
  Vec2 origin = Vec2::Zero();

  Vec3 to_world(const Vec3& local) const {
    Vec3 r = rotate_z(local, yaw);
    r.x() += origin.x();
    r.y() += origin.y();
    return r;
  }
  Vec3 to_local(const Vec3& world) const {
    Vec3 d(world.x() - origin.x(), world.y() - origin.y(), world.z());
    return rotate_z(d, -yaw);
  }
  Vec3 dir_to_world(const Vec3& local) const { return rotate_z(local, yaw); }
  Vec3 dir_to_local(const Vec3& world) const { return rotate_z(world, -yaw); }

  // this ∘ inner: first apply inner, then this.
  PlanarFrame compose(const PlanarFrame& inner) const {
    PlanarFrame out;
    out.yaw = wrap_angle(yaw + inner.yaw);
    Vec3 o = to_world(Vec3(inner.origin.x(), inner.origin.y(), 0.0));
    out.origin = {o.x(), o.y()};
    return out;
  }
};

}  // namespace sportsim
