#include "sportsim/physics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

namespace sportsim::physics {

namespace {

constexpr double kRestSpeed = 0.02;  // normal speed below which an impact settles

[[noreturn]] void blowup(const char* what) {
  throw Error(ErrorCode::kSimulationBlowup, what);
}

// Exact constant-acceleration update.
void ballistic(Vec3& p, Vec3& v, double t, double g) {
  p.x() += v.x() * t;
  p.y() += v.y() * t;
  p.z() += v.z() * t - 0.5 * g * t * t;
  v.z() -= g * t;
}

void integrate_orientation(Quat& q, const Vec3& w, double dt) {
  const double angle = w.norm() * dt;
  if (angle > 0.0) {
    q = Quat(Eigen::AngleAxisd(angle, w.normalized())) * q;
    q.normalize();
  }
}

// Reflects the normal component with restitution and caps the tangential
// change by the Coulomb limit. Returns |delta v|.
double impact(Vec3& v, const Vec3& n, double e, double mu) {
  const double vn = v.dot(n);
  if (vn >= 0.0) return 0.0;
  const Vec3 before = v;
  Vec3 vt = v - vn * n;
  double vn_new = -e * vn;
  if (vn_new < kRestSpeed) vn_new = 0.0;
  const double dvn = vn_new - vn;
  const double vt_norm = vt.norm();
  const double cap = mu * dvn;
  if (vt_norm <= cap) {
    vt.setZero();
  } else if (vt_norm > 0.0) {
    vt *= (1.0 - cap / vt_norm);
  }
  v = vt + vn_new * n;
  return (v - before).norm();
}

// After pushing an object out along n by `depth`, remove the potential energy
// gained from the kinetic energy so contacts never add energy.
void pay_for_pushout(Vec3& v, const Vec3& n, double depth, double g) {
  const double dpe = g * depth * n.z();
  if (dpe <= 0.0) return;
  const double vn = v.dot(n);
  Vec3 vt = v - vn * n;
  const double ke_n = 0.5 * vn * vn;
  if (ke_n >= dpe) {
    const double mag = std::sqrt(vn * vn - 2.0 * dpe);
    v = vt + (vn >= 0.0 ? mag : -mag) * n;
    return;
  }
  double deficit = dpe - ke_n;
  const double ke_t = 0.5 * vt.squaredNorm();
  if (ke_t <= deficit) {
    v.setZero();
  } else {
    v = vt * std::sqrt((ke_t - deficit) / ke_t);
  }
}

double ground_radius(const FreeObject& obj) {
  const Shape& s = obj.spec.shape;
  if (s.kind == ShapeKind::kCapsule) {
    const Vec3 axis = obj.kin.orient * Vec3::UnitX();
    return s.radius + s.half_length * std::abs(axis.z());
  }
  return s.contact_radius();
}

// Closest-point query against a yaw-rotated box. Returns penetration depth
// (> 0 when overlapping) and the outward normal.
double box_penetration(const Vec3& p, double r, const Vec3& center, const Vec3& half,
                       double yaw, Vec3* normal) {
  const Vec3 local = rotate_z(p - center, -yaw);
  const Vec3 closest = local.cwiseMax(-half).cwiseMin(half);
  const Vec3 d = local - closest;
  const double dist = d.norm();
  Vec3 n_local;
  double pen;
  if (dist > 1e-12) {
    if (dist >= r) return -1.0;
    n_local = d / dist;
    pen = r - dist;
  } else {
    int axis = 0;
    double best = half.x() - std::abs(local.x());
    for (int k = 1; k < 3; ++k) {
      const double m = half[k] - std::abs(local[k]);
      if (m < best) {
        best = m;
        axis = k;
      }
    }
    n_local = Vec3::Zero();
    n_local[axis] = local[axis] >= 0.0 ? 1.0 : -1.0;
    pen = r + best;
  }
  *normal = rotate_z(n_local, yaw);
  return pen;
}

}  // namespace

double Shape::contact_radius() const {
  switch (kind) {
    case ShapeKind::kSphere: return radius;
    case ShapeKind::kCapsule: return radius;
    case ShapeKind::kBox: return half_extents.norm();
  }
  return radius;
}

void ObjectSpec::validate() const {
  bool ok = mass > 0.0 && restitution >= 0.0 && restitution <= 1.0 && friction >= 0.0;
  switch (shape.kind) {
    case ShapeKind::kSphere: ok = ok && shape.radius > 0.0; break;
    case ShapeKind::kCapsule: ok = ok && shape.radius > 0.0 && shape.half_length > 0.0; break;
    case ShapeKind::kBox: ok = ok && (shape.half_extents.array() > 0.0).all(); break;
  }
  if (!ok) throw Error(ErrorCode::kConfiguration, "invalid object spec");
}

double Terrain::height(double x, double y) const {
  const Vec3 l = frame.to_local(Vec3(x, y, 0.0));
  const double k = 2.0 * kPi / wavelength;
  return 0.5 * amplitude * (std::sin(k * l.x() + phase_x) + std::sin(k * l.y() + phase_y));
}

Vec2 Terrain::gradient(double x, double y) const {
  const Vec3 l = frame.to_local(Vec3(x, y, 0.0));
  const double k = 2.0 * kPi / wavelength;
  const Vec3 g_local(0.5 * amplitude * k * std::cos(k * l.x() + phase_x),
                     0.5 * amplitude * k * std::cos(k * l.y() + phase_y), 0.0);
  const Vec3 g = frame.dir_to_world(g_local);
  return {g.x(), g.y()};
}

void Terrain::sample_patch(const Vec3& center, double yaw, double spacing, int rows, int cols,
                           double reference_z, float* out) const {
  const double c = std::cos(yaw), s = std::sin(yaw);
  for (int i = 0; i < rows; ++i) {
    const double u = (i - 0.5 * (rows - 1)) * spacing;
    for (int j = 0; j < cols; ++j) {
      const double w = (j - 0.5 * (cols - 1)) * spacing;
      const double x = center.x() + c * u - s * w;
      const double y = center.y() + s * u + c * w;
      out[i * cols + j] = static_cast<float>(height(x, y) - reference_z);
    }
  }
}

void Terrain::export_grid(const std::string& path, double x0, double y0, double spacing,
                          int rows, int cols) const {
  std::vector<float> buf(static_cast<size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      buf[static_cast<size_t>(i) * cols + j] =
          static_cast<float>(height(x0 + j * spacing, y0 + i * spacing));
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kConfiguration, "cannot write terrain grid to " + path);
  // Host is little-endian on every supported target.
  f.write(reinterpret_cast<const char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

double mechanical_energy(const FreeObject& obj, double gravity) {
  return obj.spec.mass * (0.5 * obj.kin.lin_vel.squaredNorm() + gravity * obj.kin.pos.z());
}

void step_objects(std::span<FreeObject> objects, double dt, const StaticGeometry& geometry,
                  std::span<ObjectContacts> contacts, double gravity) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kDomain, "dt must be positive");
  for (size_t i = 0; i < objects.size(); ++i) {
    FreeObject& obj = objects[i];
    ObjectContacts* rec = i < contacts.size() ? &contacts[i] : nullptr;
    if (rec) rec->clear();
    if (obj.attached) continue;

    Vec3& p = obj.kin.pos;
    Vec3& v = obj.kin.lin_vel;
    const double e = obj.spec.restitution;
    const double mu = obj.spec.friction;
    const double m = obj.spec.mass;
    const double r_contact = obj.spec.shape.contact_radius();
    const double r_ground = ground_radius(obj);

    integrate_orientation(obj.kin.orient, obj.kin.ang_vel, dt);

    if (geometry.ground && geometry.terrain == nullptr) {
      double remaining = dt;
      for (int iter = 0; iter < 4 && remaining > 0.0; ++iter) {
        const double gap = p.z() - r_ground;
        if (gap < -10.0 * r_ground) blowup("object tunnelled through the ground");
        if (gap <= 1e-9 && v.z() <= 1e-9) {
          // Supported: vertical motion stops, friction decelerates sliding.
          if (gap < 0.0 && v.z() < 0.0) {
            const Vec3 before = v;
            impact(v, Vec3::UnitZ(), e, mu);
            if (rec) rec->add({kGroundContact, p, Vec3::UnitZ(), m * (v - before).norm() / dt});
          }
          if (gap < 0.0) {
            // Pushed under by a kinematic contact; restore the surface.
            p.z() = r_ground;
            pay_for_pushout(v, Vec3::UnitZ(), -gap, gravity);
          }
          if (v.z() > 0.0) {
            ballistic(p, v, remaining, gravity);
            remaining = 0.0;
            break;
          }
          v.z() = 0.0;
          Vec2 vt(v.x(), v.y());
          const double speed = vt.norm();
          const double decel = mu * gravity * remaining;
          const Vec2 vt_new = speed <= decel ? Vec2::Zero() : Vec2(vt * (1.0 - decel / speed));
          p.x() += 0.5 * (vt.x() + vt_new.x()) * remaining;
          p.y() += 0.5 * (vt.y() + vt_new.y()) * remaining;
          v.x() = vt_new.x();
          v.y() = vt_new.y();
          if (rec) rec->add({kGroundContact, p, Vec3::UnitZ(), m * gravity});
          remaining = 0.0;
          break;
        }
        if (gap < 0.0) {
          // Penetrating while rising: lift to the surface, paid from the
          // upward speed, then fly.
          p.z() = r_ground;
          pay_for_pushout(v, Vec3::UnitZ(), -gap, gravity);
          continue;
        }
        const double t_hit = (v.z() + std::sqrt(v.z() * v.z() + 2.0 * gravity * gap)) / gravity;
        if (t_hit > remaining) {
          ballistic(p, v, remaining, gravity);
          remaining = 0.0;
          break;
        }
        ballistic(p, v, t_hit, gravity);
        p.z() = r_ground;
        remaining -= t_hit;
        const Vec3 before = v;
        impact(v, Vec3::UnitZ(), e, mu);
        if (rec) rec->add({kGroundContact, p, Vec3::UnitZ(), m * (v - before).norm() / dt});
      }
      if (remaining > 0.0) ballistic(p, v, remaining, gravity);
    } else {
      ballistic(p, v, dt, gravity);
    }

    if (geometry.terrain != nullptr) {
      const Terrain& t = *geometry.terrain;
      const double h = t.height(p.x(), p.y());
      const Vec2 grad = t.gradient(p.x(), p.y());
      const Vec3 n = Vec3(-grad.x(), -grad.y(), 1.0).normalized();
      const double gap = (p.z() - h) * n.z() - r_ground;
      if (gap < 0.0) {
        if (-gap > 10.0 * r_ground) blowup("object tunnelled through the terrain");
        const Vec3 before = v;
        impact(v, n, e, mu);
        p += n * (-gap);
        pay_for_pushout(v, n, -gap, gravity);
        if (rec) rec->add({kTerrainContact, p, n, m * std::max((v - before).norm(), gravity * dt) / dt});
      }
    }

    for (size_t b = 0; b < geometry.boxes.size(); ++b) {
      const StaticBox& box = geometry.boxes[b];
      Vec3 n;
      const double pen = box_penetration(p, r_contact, box.center, box.half_extents, box.yaw, &n);
      if (pen <= 0.0) continue;
      if (!box.solid) {
        if (rec) rec->add({static_cast<int>(b), p, n, 0.0});
        continue;
      }
      if (pen > 10.0 * r_contact) blowup("object tunnelled into static geometry");
      const Vec3 before = v;
      impact(v, n, e, mu);
      p += n * pen;
      pay_for_pushout(v, n, pen, gravity);
      if (rec)
        rec->add({static_cast<int>(b), p, n, m * std::max((v - before).norm(), gravity * dt * n.z()) / dt});
    }

    if (!p.allFinite() || !v.allFinite()) blowup("non-finite object state");
  }
}

namespace {

double kinematic_response(FreeObject& obj, const Vec3& n, const Vec3& surface_vel,
                          double restitution, double dt) {
  Vec3& v = obj.kin.lin_vel;
  const double rel = (v - surface_vel).dot(n);
  if (rel >= 0.0) return 0.0;
  const Vec3 dv = -(1.0 + restitution) * rel * n;
  v += dv;
  return obj.spec.mass * dv.norm() / dt;
}

}  // namespace

bool overlaps(const FreeObject& obj, const KinematicSphere& s) {
  const double r = obj.spec.shape.contact_radius() + s.radius;
  return (obj.kin.pos - s.center).squaredNorm() <= r * r;
}

bool overlaps(const FreeObject& obj, const KinematicDisc& d) {
  const Vec3 rel = obj.kin.pos - d.center;
  const double along = rel.dot(d.normal);
  const double r = obj.spec.shape.contact_radius();
  if (std::abs(along) > r) return false;
  return (rel - along * d.normal).norm() <= d.radius;
}

bool overlaps(const FreeObject& obj, const KinematicBox& b) {
  Vec3 n;
  return box_penetration(obj.kin.pos, obj.spec.shape.contact_radius(), b.center, b.half_extents,
                         b.yaw, &n) >= 0.0;
}

double resolve_contact(FreeObject& obj, const KinematicSphere& s, double restitution, double dt) {
  const Vec3 d = obj.kin.pos - s.center;
  const double dist = d.norm();
  const double reach = obj.spec.shape.contact_radius() + s.radius;
  if (dist > reach) return 0.0;
  const Vec3 n = dist > 1e-12 ? Vec3(d / dist) : Vec3(Vec3::UnitZ());
  obj.kin.pos = s.center + n * reach;
  return kinematic_response(obj, n, s.velocity, restitution, dt);
}

double resolve_contact(FreeObject& obj, const KinematicDisc& disc, double restitution, double dt) {
  if (!overlaps(obj, disc)) return 0.0;
  const Vec3 rel = obj.kin.pos - disc.center;
  const double along = rel.dot(disc.normal);
  // Pick the face the ball is approaching from; ties go to the face the disc
  // is moving toward.
  double side = along > 0.0 ? 1.0 : (along < 0.0 ? -1.0 : 0.0);
  if (side == 0.0) side = disc.velocity.dot(disc.normal) >= 0.0 ? 1.0 : -1.0;
  const Vec3 n = side * disc.normal;
  const double r = obj.spec.shape.contact_radius();
  obj.kin.pos += n * (r - std::abs(along));
  return kinematic_response(obj, n, disc.velocity, restitution, dt);
}

double resolve_contact(FreeObject& obj, const KinematicBox& b, double restitution, double dt) {
  Vec3 n;
  const double pen = box_penetration(obj.kin.pos, obj.spec.shape.contact_radius(), b.center,
                                     b.half_extents, b.yaw, &n);
  if (pen < 0.0) return 0.0;
  obj.kin.pos += n * pen;
  return kinematic_response(obj, n, b.velocity, restitution, dt);
}

void validate_actions(std::span<const float> actions, int agents, int action_dim) {
  if (actions.size() != static_cast<size_t>(agents) * static_cast<size_t>(action_dim)) {
    throw Error(ErrorCode::kInvalidAction,
                "action block has " + std::to_string(actions.size()) + " values, expected " +
                    std::to_string(agents * action_dim));
  }
  for (float a : actions) {
    if (!std::isfinite(a)) throw Error(ErrorCode::kInvalidAction, "non-finite action value");
  }
}

ProxyBackend::ProxyBackend(const SkeletonSpec& skeleton, int agents, ProxyParams params)
    : skeleton_(skeleton), params_(params) {
  skeleton_.validate();
  if (skeleton_.rest_offsets.empty())
    throw Error(ErrorCode::kConfiguration, "proxy backend needs rest offsets");
  if (agents < 1) throw Error(ErrorCode::kConfiguration, "proxy backend needs >= 1 agent");
  const int n = skeleton_.joint_count;
  const auto& ee = skeleton_.end_effectors;
  marker_joint_ = {ee.head, ee.left_hand, ee.right_hand, ee.left_foot, ee.right_foot};

  auto channel = [&](int joint) { return 3 * (joint - 1); };
  const int lhip = skeleton_.index_of("L_Hip");
  const int rhip = skeleton_.index_of("R_Hip");
  ch_planar_ = channel(lhip > 0 ? lhip : 1);
  ch_yaw_ = channel(rhip > 0 ? rhip : std::min(2, n - 1));
  ch_grip_ = skeleton_.grip_joint >= 1 ? channel(skeleton_.grip_joint) : -1;
  for (int m = 0; m < kMarkerCount; ++m) ch_marker_[m] = channel(std::max(1, marker_joint_[m]));

  follow_marker_.assign(n, -1);
  follow_weight_.assign(n, 0.0);
  auto contains = [](const std::string& s, const char* sub) {
    return s.find(sub) != std::string::npos;
  };
  for (int j = 1; j < n; ++j) {
    const std::string& name = skeleton_.body_names[j];
    int marker = -1;
    double weight = 0.0;
    for (int m = 0; m < kMarkerCount; ++m) {
      if (marker_joint_[m] == j) {
        marker = m;
        weight = 1.0;
      }
    }
    const bool left = name.rfind("L_", 0) == 0 || name.rfind("left_", 0) == 0;
    if (marker < 0) {
      if (contains(name, "Elbow")) {
        marker = left ? kLeftHand : kRightHand;
        weight = 0.5;
      } else if (contains(name, "Knee")) {
        marker = left ? kLeftFoot : kRightFoot;
        weight = 0.5;
      } else if (contains(name, "Neck")) {
        marker = kHead;
        weight = 0.5;
      } else if (contains(name, "Ankle")) {
        marker = left ? kLeftFoot : kRightFoot;
        weight = 1.0;
      } else if (contains(name, "Hand") || name.rfind("left_", 0) == 0 ||
                 name.rfind("right_", 0) == 0) {
        marker = left ? kLeftHand : kRightHand;
        weight = 1.0;
      } else {
        double best = 0.12;
        for (int m = 0; m < kMarkerCount; ++m) {
          const double d = (skeleton_.rest_offsets[j] - skeleton_.rest_offsets[marker_joint_[m]]).norm();
          if (d < best) {
            best = d;
            marker = m;
            weight = 1.0;
          }
        }
      }
    }
    follow_marker_[j] = marker;
    follow_weight_[j] = marker >= 0 ? weight : 0.0;
  }

  agents_.resize(agents);
  for (auto& a : agents_) {
    a.body = BodyState(n);
    a.root = Vec3(0, 0, skeleton_.stand_height);
    rebuild_body(a);
  }
}

bool ProxyBackend::grounded(int agent) const { return !agents_[agent].airborne; }

void ProxyBackend::place(int agent, const Vec3& root, double yaw) {
  AgentState& a = agents_[agent];
  a.root = root;
  a.root_vel.setZero();
  a.yaw = wrap_angle(yaw);
  a.yaw_rate = 0.0;
  for (int m = 0; m < kMarkerCount; ++m) {
    a.offset[m].setZero();
    a.offset_vel[m].setZero();
  }
  a.airborne = root.z() > skeleton_.stand_height + params_.leg_extension;
  a.grip = true;
  rebuild_body(a);
}

void ProxyBackend::reset(std::span<const BodyState> initial) {
  if (initial.size() != agents_.size())
    throw Error(ErrorCode::kConfiguration, "reset needs one body state per agent");
  for (size_t i = 0; i < agents_.size(); ++i) {
    initial[i].validate(skeleton_.joint_count);
    place(static_cast<int>(i), initial[i].joint_pos[0], yaw_of(initial[i]));
    agents_[i].root_vel = initial[i].lin_vel[0];
    rebuild_body(agents_[i]);
  }
}

double ProxyBackend::actuate(double demand) {
  const double u = std::clamp(demand, -params_.cap, params_.cap);
  max_actuation_ = std::max(max_actuation_, std::abs(u));
  return u;
}

void ProxyBackend::integrate(AgentState& a, std::span<const float> act, double dt) {
  const ProxyParams& P = params_;
  auto ch = [&](int idx) { return std::clamp(static_cast<double>(act[idx]), -1.0, 1.0); };
  const double inv_cap = 1.0 / P.cap;

  // Planar root velocity in the heading frame.
  const double c = std::cos(a.yaw), s = std::sin(a.yaw);
  const double v_fwd = c * a.root_vel.x() + s * a.root_vel.y();
  const double v_lat = -s * a.root_vel.x() + c * a.root_vel.y();
  const double control = a.airborne ? P.air_control : 1.0;
  const double u_fwd = actuate(P.velocity_gain * (ch(ch_planar_) * P.max_speed - v_fwd));
  const double u_lat = actuate(P.velocity_gain * (ch(ch_planar_ + 1) * P.max_speed - v_lat));
  const double acc_fwd = u_fwd * inv_cap * P.planar_accel * control;
  const double acc_lat = u_lat * inv_cap * P.planar_accel * control;
  a.root_vel.x() += (c * acc_fwd - s * acc_lat) * dt;
  a.root_vel.y() += (s * acc_fwd + c * acc_lat) * dt;

  const double u_yaw = actuate(P.velocity_gain * (ch(ch_yaw_) * P.max_yaw_rate - a.yaw_rate));
  a.yaw_rate += u_yaw * inv_cap * P.yaw_accel * control * dt;

  // Vertical: ballistic while airborne, leg-supported otherwise.
  const double stand = skeleton_.stand_height;
  const double top = stand + P.leg_extension;
  if (a.airborne) {
    a.root_vel.z() -= kGravity * dt;
  } else {
    const double vertical = ch(ch_planar_ + 2);
    double u;
    if (vertical > 0.0) {
      u = actuate(P.velocity_gain * (vertical * P.jump_speed - a.root_vel.z()));
    } else {
      const double target = stand + vertical * (stand - 0.05);
      u = actuate(5000.0 * (target - a.root.z()) - 470.0 * a.root_vel.z());
    }
    a.root_vel.z() += u * inv_cap * P.vertical_accel * dt;
  }
  a.root += a.root_vel * dt;
  a.yaw = wrap_angle(a.yaw + a.yaw_rate * dt);
  if (a.airborne) {
    if (a.root.z() <= top && a.root_vel.z() < 0.0) a.airborne = false;
  } else if (a.root.z() > top) {
    a.airborne = true;
  }
  if (a.root.z() < P.min_root_height) {
    a.root.z() = P.min_root_height;
    a.root_vel.z() = std::max(a.root_vel.z(), 0.0);
    a.airborne = false;
  }

  // End-effector markers.
  const double reach[kMarkerCount] = {P.head_reach, P.hand_reach, P.hand_reach, P.foot_reach,
                                      P.foot_reach};
  const double accel[kMarkerCount] = {P.head_accel, P.hand_accel, P.hand_accel, P.foot_accel,
                                      P.foot_accel};
  for (int m = 0; m < kMarkerCount; ++m) {
    const int base = ch_marker_[m];
    Vec3& off = a.offset[m];
    Vec3& ov = a.offset_vel[m];
    for (int k = 0; k < 3; ++k) {
      const double target = ch(base + k) * reach[m];
      const double u = actuate(P.marker_stiffness * (target - off[k]) - P.marker_damping * ov[k]);
      ov[k] += u * inv_cap * accel[m] * dt;
      off[k] += ov[k] * dt;
    }
    // Markers stay above the floor.
    const double floor = 0.03 - a.root.z() - skeleton_.rest_offsets[marker_joint_[m]].z();
    if (off.z() < floor) {
      off.z() = floor;
      ov.z() = std::max(ov.z(), 0.0);
    }
  }
  if (ch_grip_ >= 0) a.grip = act[ch_grip_] >= 0.0f;
}

void ProxyBackend::rebuild_body(AgentState& a) const {
  const double c = std::cos(a.yaw), s = std::sin(a.yaw);
  const Rot6 rot{c, s, 0.0, -s, c, 0.0};
  const Vec3 omega(0.0, 0.0, a.yaw_rate);
  BodyState& b = a.body;
  const int n = skeleton_.joint_count;
  for (int j = 0; j < n; ++j) {
    Vec3 off = skeleton_.rest_offsets[j];
    Vec3 off_vel = Vec3::Zero();
    const int m = follow_marker_[j];
    if (m >= 0) {
      off += follow_weight_[j] * a.offset[m];
      off_vel = follow_weight_[j] * a.offset_vel[m];
    }
    const Vec3 world_off = rotate_z(off, c, s);
    b.joint_pos[j] = a.root + world_off;
    b.lin_vel[j] = a.root_vel + omega.cross(world_off) + rotate_z(off_vel, c, s);
    b.ang_vel[j] = omega;
    b.joint_rot[j] = rot;
  }
}

void ProxyBackend::step(std::span<const float> actions, int substeps, double dt) {
  const int dim = skeleton_.action_dim;
  validate_actions(actions, agents(), dim);
  if (substeps < 1 || !(dt > 0.0)) throw Error(ErrorCode::kDomain, "bad substep configuration");
  max_actuation_ = 0.0;
  for (int sub = 0; sub < substeps; ++sub) {
    for (size_t i = 0; i < agents_.size(); ++i) {
      integrate(agents_[i], actions.subspan(i * dim, dim), dt);
      rebuild_body(agents_[i]);
    }
  }
}

}  // namespace sportsim::physics
