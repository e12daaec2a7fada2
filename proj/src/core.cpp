#include "sportsim/core.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace sportsim {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidState: return "invalid-state";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kNoSolution: return "no-solution";
    case ErrorCode::kDegenerateTarget: return "degenerate-target";
    case ErrorCode::kSimulationBlowup: return "simulation-blowup";
    case ErrorCode::kConfiguration: return "configuration";
    case ErrorCode::kInvalidAction: return "invalid-action";
    case ErrorCode::kProtocol: return "protocol";
    case ErrorCode::kConnection: return "connection";
    case ErrorCode::kIncompatible: return "incompatible";
    case ErrorCode::kIntegrity: return "integrity";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

namespace {

[[noreturn]] void config_error(const std::string& msg) {
  throw Error(ErrorCode::kConfiguration, msg);
}

// SMPL canonical joint order.
const char* const kSmplNames[24] = {
    "Pelvis",     "L_Hip",      "R_Hip",   "Spine1",  "L_Knee",   "R_Knee",
    "Spine2",     "L_Ankle",    "R_Ankle", "Spine3",  "L_Foot",   "R_Foot",
    "Neck",       "L_Collar",   "R_Collar", "Head",   "L_Shoulder", "R_Shoulder",
    "L_Elbow",    "R_Elbow",    "L_Wrist", "R_Wrist", "L_Hand",   "R_Hand"};

const double kSmplRest[24][3] = {
    {0.00, 0.00, 0.00},  {0.00, 0.09, -0.08},  {0.00, -0.09, -0.08},
    {0.00, 0.00, 0.11},  {0.00, 0.10, -0.45},  {0.00, -0.10, -0.45},
    {0.00, 0.00, 0.24},  {0.00, 0.11, -0.85},  {0.00, -0.11, -0.85},
    {0.00, 0.00, 0.30},  {0.12, 0.12, -0.88},  {0.12, -0.12, -0.88},
    {0.00, 0.00, 0.51},  {0.00, 0.08, 0.42},   {0.00, -0.08, 0.42},
    {0.00, 0.00, 0.63},  {0.00, 0.18, 0.44},   {0.00, -0.18, 0.44},
    {0.00, 0.20, 0.18},  {0.00, -0.20, 0.18},  {0.00, 0.22, -0.06},
    {0.00, -0.22, -0.06}, {0.00, 0.23, -0.14}, {0.00, -0.23, -0.14}};

SkeletonSpec make_smpl() {
  SkeletonSpec s;
  s.name = "smpl";
  s.joint_count = 24;
  s.actuated_count = 23;
  s.action_dim = 69;
  for (int i = 0; i < 24; ++i) {
    s.body_names.emplace_back(kSmplNames[i]);
    s.rest_offsets.emplace_back(kSmplRest[i][0], kSmplRest[i][1], kSmplRest[i][2]);
  }
  s.end_effectors = {15, 20, 21, 10, 11};
  s.grip_joint = 23;
  return s;
}

SkeletonSpec make_smplx() {
  SkeletonSpec s;
  s.name = "smplx";
  s.joint_count = 52;
  s.actuated_count = 51;
  s.action_dim = 153;
  for (int i = 0; i < 22; ++i) {
    s.body_names.emplace_back(kSmplNames[i]);
    s.rest_offsets.emplace_back(kSmplRest[i][0], kSmplRest[i][1], kSmplRest[i][2]);
  }
  const char* fingers[5] = {"index", "middle", "pinky", "ring", "thumb"};
  for (int side = 0; side < 2; ++side) {
    const char* prefix = side == 0 ? "left_" : "right_";
    const double sign = side == 0 ? 1.0 : -1.0;
    const Vec3 wrist(kSmplRest[20 + side][0], kSmplRest[20 + side][1],
                     kSmplRest[20 + side][2]);
    for (int f = 0; f < 5; ++f) {
      for (int seg = 1; seg <= 3; ++seg) {
        s.body_names.push_back(std::string(prefix) + fingers[f] + std::to_string(seg));
        s.rest_offsets.push_back(
            wrist + Vec3(0.015 * (f - 2), sign * 0.01, -0.04 - 0.025 * seg));
      }
    }
  }
  s.end_effectors = {15, 20, 21, 10, 11};
  s.grip_joint = 37;  // right_index1
  return s;
}

}  // namespace

const SkeletonSpec& smpl_skeleton() {
  static const SkeletonSpec spec = [] {
    auto s = make_smpl();
    s.validate();
    return s;
  }();
  return spec;
}

const SkeletonSpec& smplx_skeleton() {
  static const SkeletonSpec spec = [] {
    auto s = make_smplx();
    s.validate();
    return s;
  }();
  return spec;
}

void SkeletonSpec::validate() const {
  if (joint_count < 1) config_error("skeleton '" + name + "': joint_count must be >= 1");
  if (actuated_count != joint_count - 1)
    config_error("skeleton '" + name + "': actuated_count must equal joint_count - 1");
  if (action_dim != 3 * actuated_count)
    config_error("skeleton '" + name + "': action_dim must equal 3 * actuated_count");
  if (static_cast<int>(body_names.size()) != joint_count)
    config_error("skeleton '" + name + "': body_names length mismatch");
  if (!rest_offsets.empty() && static_cast<int>(rest_offsets.size()) != joint_count)
    config_error("skeleton '" + name + "': rest_offsets length mismatch");
  const int ee[] = {end_effectors.head, end_effectors.left_hand, end_effectors.right_hand,
                    end_effectors.left_foot, end_effectors.right_foot};
  for (int idx : ee) {
    if (idx < 0 || idx >= joint_count)
      config_error("skeleton '" + name + "': end-effector index out of range");
  }
  if (grip_joint >= joint_count) config_error("skeleton '" + name + "': grip joint out of range");
}

int SkeletonSpec::index_of(std::string_view body) const {
  for (size_t i = 0; i < body_names.size(); ++i) {
    if (body_names[i] == body) return static_cast<int>(i);
  }
  return -1;
}

int SkeletonSpec::require(std::string_view body) const {
  const int idx = index_of(body);
  if (idx < 0) config_error("skeleton '" + name + "' has no body '" + std::string(body) + "'");
  return idx;
}

SkeletonSpec load_skeleton(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("skeleton document: ") + e.what());
  }
  SkeletonSpec s;
  try {
    s.name = doc.at("name").get<std::string>();
    s.joint_count = doc.at("joint_count").get<int>();
    s.actuated_count = doc.at("actuated_count").get<int>();
    s.action_dim = doc.at("action_dim").get<int>();
    s.body_names = doc.at("body_names").get<std::vector<std::string>>();
    const auto& ee = doc.at("end_effectors");
    auto resolve = [&](const char* key) {
      const auto& v = ee.at(key);
      if (v.is_string()) {
        for (size_t i = 0; i < s.body_names.size(); ++i)
          if (s.body_names[i] == v.get<std::string>()) return static_cast<int>(i);
        config_error(std::string("end effector '") + key + "' names an unknown body");
      }
      return v.get<int>();
    };
    s.end_effectors = {resolve("head"), resolve("left_hand"), resolve("right_hand"),
                       resolve("left_foot"), resolve("right_foot")};
    if (doc.contains("rest_offsets")) {
      for (const auto& row : doc.at("rest_offsets")) {
        auto v = row.get<std::vector<double>>();
        if (v.size() != 3) config_error("rest_offsets rows must have 3 values");
        s.rest_offsets.emplace_back(v[0], v[1], v[2]);
      }
    }
    if (doc.contains("grip_joint")) {
      const auto& g = doc.at("grip_joint");
      s.grip_joint = g.is_string() ? s.index_of(g.get<std::string>()) : g.get<int>();
    }
    if (doc.contains("stand_height")) s.stand_height = doc.at("stand_height").get<double>();
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("skeleton document: ") + e.what());
  }
  s.validate();
  return s;
}

std::string skeleton_to_json(const SkeletonSpec& s) {
  nlohmann::json doc;
  doc["name"] = s.name;
  doc["joint_count"] = s.joint_count;
  doc["actuated_count"] = s.actuated_count;
  doc["action_dim"] = s.action_dim;
  doc["body_names"] = s.body_names;
  doc["end_effectors"] = {{"head", s.end_effectors.head},
                          {"left_hand", s.end_effectors.left_hand},
                          {"right_hand", s.end_effectors.right_hand},
                          {"left_foot", s.end_effectors.left_foot},
                          {"right_foot", s.end_effectors.right_foot}};
  nlohmann::json rest = nlohmann::json::array();
  for (const auto& r : s.rest_offsets) rest.push_back({r.x(), r.y(), r.z()});
  doc["rest_offsets"] = rest;
  doc["grip_joint"] = s.grip_joint;
  doc["stand_height"] = s.stand_height;
  return doc.dump(2);
}

void BodyState::validate(int expected_joints) const {
  const size_t n = static_cast<size_t>(expected_joints);
  if (joint_rot.size() != n || joint_pos.size() != n || ang_vel.size() != n ||
      lin_vel.size() != n) {
    throw Error(ErrorCode::kInvalidState, "body state length does not match skeleton");
  }
  for (size_t j = 0; j < n; ++j) {
    for (double v : joint_rot[j]) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidState, "non-finite rotation");
    }
    if (!joint_pos[j].allFinite() || !ang_vel[j].allFinite() || !lin_vel[j].allFinite())
      throw Error(ErrorCode::kInvalidState, "non-finite joint kinematics");
  }
}

void BodyState::flatten(float* out) const {
  const int n = joints();
  float* rot = out;
  float* pos = out + 6 * n;
  float* av = pos + 3 * n;
  float* lv = av + 3 * n;
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < 6; ++k) rot[6 * j + k] = static_cast<float>(joint_rot[j][k]);
    for (int k = 0; k < 3; ++k) {
      pos[3 * j + k] = static_cast<float>(joint_pos[j][k]);
      av[3 * j + k] = static_cast<float>(ang_vel[j][k]);
      lv[3 * j + k] = static_cast<float>(lin_vel[j][k]);
    }
  }
}

void ObjectKinematics::validate() const {
  if (!pos.allFinite() || !lin_vel.allFinite() || !ang_vel.allFinite() ||
      !orient.coeffs().allFinite()) {
    throw Error(ErrorCode::kInvalidState, "non-finite object kinematics");
  }
  if (std::abs(orient.norm() - 1.0) > 1e-6)
    throw Error(ErrorCode::kInvalidState, "object orientation is not a unit quaternion");
}

std::array<double, 13> ObjectKinematics::to_array() const {
  return {pos.x(),      pos.y(),      pos.z(),      orient.w(),   orient.x(),
          orient.y(),   orient.z(),   lin_vel.x(),  lin_vel.y(),  lin_vel.z(),
          ang_vel.x(),  ang_vel.y(),  ang_vel.z()};
}

ArenaBounds::ArenaBounds(Vec2 lo, Vec2 hi) : min_xy(lo), max_xy(hi) {
  if (!(lo.x() < hi.x() && lo.y() < hi.y()))
    config_error("arena bounds must satisfy min < max componentwise");
}

int ContactSet::register_pair(std::string name, bool sticky) {
  for (size_t i = 0; i < pairs_.size(); ++i) {
    if (pairs_[i].name == name) return static_cast<int>(i);
  }
  pairs_.push_back(Pair{std::move(name), sticky});
  return static_cast<int>(pairs_.size()) - 1;
}

int ContactSet::pair_index(std::string_view name) const {
  for (size_t i = 0; i < pairs_.size(); ++i) {
    if (pairs_[i].name == name) return static_cast<int>(i);
  }
  config_error("unknown contact pair '" + std::string(name) + "'");
}

void ContactSet::mark(int pair, double force) {
  Pair& p = pairs_[pair];
  p.active = true;
  p.force = std::max(p.force, force);
  if (p.sticky) p.latched = true;
}

void ContactSet::begin_step() {
  for (auto& f : body_forces_) f.setZero();
  for (auto& p : pairs_) {
    p.active = false;
    p.force = 0.0;
  }
}

void ContactSet::reset() {
  begin_step();
  for (auto& p : pairs_) p.latched = false;
}

void ContactSet::squared_norms(float* out) const {
  for (size_t j = 0; j < body_forces_.size(); ++j)
    out[j] = static_cast<float>(body_forces_[j].squaredNorm());
}

void heading_normalize_into(const BodyState& state, double reference_yaw, BodyState* out) {
  if (!std::isfinite(reference_yaw))
    throw Error(ErrorCode::kInvalidState, "reference yaw is not finite");
  const int n = state.joints();
  if (n == 0) throw Error(ErrorCode::kInvalidState, "empty body state");
  if (out->joints() != n) *out = BodyState(n);
  const double c = std::cos(-reference_yaw), s = std::sin(-reference_yaw);
  const Vec3 root = state.joint_pos[0];
  bool finite = true;
  for (int j = 0; j < n; ++j) {
    const Vec3& p = state.joint_pos[j];
    out->joint_pos[j] = rotate_z(Vec3(p.x() - root.x(), p.y() - root.y(), p.z()), c, s);
    out->lin_vel[j] = rotate_z(state.lin_vel[j], c, s);
    out->ang_vel[j] = rotate_z(state.ang_vel[j], c, s);
    const Rot6& r = state.joint_rot[j];
    Rot6& o = out->joint_rot[j];
    o[0] = c * r[0] - s * r[1];
    o[1] = s * r[0] + c * r[1];
    o[2] = r[2];
    o[3] = c * r[3] - s * r[4];
    o[4] = s * r[3] + c * r[4];
    o[5] = r[5];
    finite = finite && out->joint_pos[j].allFinite() && out->lin_vel[j].allFinite() &&
             out->ang_vel[j].allFinite() && std::isfinite(o[0] + o[1] + o[2] + o[3] + o[4] + o[5]);
  }
  if (!finite) throw Error(ErrorCode::kInvalidState, "non-finite body state");
}

BodyState heading_normalize(const BodyState& state, double reference_yaw) {
  BodyState out(state.joints());
  heading_normalize_into(state, reference_yaw, &out);
  return out;
}

double yaw_of(const Rot6& rot) {
  Mat3 m;
  if (!rot6_to_matrix(rot, &m))
    throw Error(ErrorCode::kInvalidState, "degenerate root rotation");
  double yaw;
  // ZYX decomposition; at pitch = +-90 degrees the heading comes from the
  // second column instead.
  if (std::hypot(m(0, 0), m(1, 0)) > 1e-9) {
    yaw = std::atan2(m(1, 0), m(0, 0));
  } else {
    yaw = std::atan2(-m(0, 1), m(1, 1));
  }
  return wrap_angle(yaw);
}

double yaw_of(const BodyState& state) {
  if (state.joint_rot.empty()) throw Error(ErrorCode::kInvalidState, "empty body state");
  return yaw_of(state.joint_rot[0]);
}

}  // namespace sportsim
