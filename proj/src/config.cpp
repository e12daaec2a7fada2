#include "sportsim/config.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sportsim/error.hpp"

namespace sportsim {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void config_error(const std::string& msg) {
  throw Error(ErrorCode::kConfiguration, msg);
}

#define SPORTSIM_ARENA_DOUBLES(X)                                                         \
  X(hurdle_first) X(hurdle_spacing) X(hurdle_height) X(track_finish) X(track_half_width) \
  X(high_jump_bar_x) X(high_jump_bar_y) X(high_jump_bar_half_length)                     \
  X(high_jump_bar_height) X(long_jump_line) X(golf_target_min) X(golf_target_max)         \
  X(terrain_amplitude) X(terrain_wavelength) X(heightmap_spacing) X(golf_contact_timeout) \
  X(golf_body_clearance) X(golf_ball_radius) X(golf_ball_mass) X(golf_ball_restitution)   \
  X(golf_ball_friction) X(javelin_length) X(javelin_radius) X(javelin_mass)               \
  X(javelin_detach_distance) X(javelin_max_deviation) X(javelin_release_deadline)         \
  X(javelin_min_clearance) X(court_length) X(court_width) X(court_net_height)             \
  X(tennis_ball_radius) X(tennis_ball_mass) X(tennis_ball_restitution) X(racket_radius)   \
  X(racket_offset) X(tennis_speed_min) X(tennis_speed_max) X(table_length) X(table_width) \
  X(table_height) X(table_net_height) X(table_ball_radius) X(table_ball_mass)             \
  X(table_ball_restitution) X(paddle_radius) X(paddle_offset) X(table_speed_min)          \
  X(table_speed_max) X(implement_restitution) X(piste_length) X(piste_width) X(ring_size) \
  X(sword_length) X(glove_radius) X(target_radius) X(point_distance) X(point_force)       \
  X(striker_mass) X(combat_spawn_gap) X(field_length) X(field_width) X(goal_width)        \
  X(goal_height) X(soccer_ball_diameter) X(soccer_ball_mass) X(soccer_ball_restitution)   \
  X(soccer_ball_friction) X(penalty_agent_distance) X(penalty_ball_distance)              \
  X(foot_radius) X(court_b_length) X(court_b_width) X(hoop_height) X(hoop_radius)         \
  X(free_throw_distance) X(basketball_radius) X(basketball_mass) X(basketball_restitution)

#define SPORTSIM_ARENA_INTS(X) X(hurdle_count) X(heightmap_size)

struct DoubleField {
  const char* name;
  double Arena::*member;
};
struct IntField {
  const char* name;
  int Arena::*member;
};

#define SPORTSIM_FIELD(name) {#name, &Arena::name},
constexpr DoubleField kDoubleFields[] = {SPORTSIM_ARENA_DOUBLES(SPORTSIM_FIELD)};
constexpr IntField kIntFields[] = {SPORTSIM_ARENA_INTS(SPORTSIM_FIELD)};
#undef SPORTSIM_FIELD

struct EnvEntry {
  const char* id;
  Sport sport;
  int agents;
  const char* skeleton;
  double time_limit;
};

constexpr EnvEntry kEnvs[] = {
    {"high_jump", Sport::kHighJump, 1, "smpl", 30.0},
    {"long_jump", Sport::kLongJump, 1, "smpl", 30.0},
    {"hurdling", Sport::kHurdling, 1, "smpl", 30.0},
    {"golf", Sport::kGolf, 1, "smpl", 30.0},
    {"javelin", Sport::kJavelin, 1, "smpl", 30.0},
    {"tennis", Sport::kTennis, 1, "smpl", 60.0},
    {"tennis_1v1", Sport::kTennis, 2, "smpl", 60.0},
    {"table_tennis", Sport::kTableTennis, 1, "smpl", 60.0},
    {"table_tennis_1v1", Sport::kTableTennis, 2, "smpl", 60.0},
    {"fencing", Sport::kFencing, 2, "smpl", 60.0},
    {"boxing", Sport::kBoxing, 2, "smpl", 60.0},
    {"penalty_kick", Sport::kPenaltyKick, 1, "smpl", 40.0},
    {"soccer_1v1", Sport::kSoccer, 2, "smpl", 120.0},
    {"soccer_2v2", Sport::kSoccer, 4, "smpl", 120.0},
    {"free_throw", Sport::kFreeThrow, 1, "smplx", 40.0},
};

const char* mode_name(Curriculum::Mode m) {
  switch (m) {
    case Curriculum::Mode::kOff: return "off";
    case Curriculum::Mode::kLadder: return "ladder";
    case Curriculum::Mode::kUniform: return "uniform";
  }
  return "off";
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p);
  if (!f) config_error("cannot read config file " + p.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

template <typename T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    config_error("config key '" + key + "' has the wrong type");
  }
}

}  // namespace

std::string_view sport_name(Sport s) {
  return rewards::kernel_info(reward_kernel(s)).name;
}

rewards::Kernel reward_kernel(Sport s) {
  switch (s) {
    case Sport::kHighJump: return rewards::Kernel::kHighJump;
    case Sport::kLongJump: return rewards::Kernel::kLongJump;
    case Sport::kHurdling: return rewards::Kernel::kHurdling;
    case Sport::kGolf: return rewards::Kernel::kGolf;
    case Sport::kJavelin: return rewards::Kernel::kJavelin;
    case Sport::kTennis: return rewards::Kernel::kTennis;
    case Sport::kTableTennis: return rewards::Kernel::kTableTennis;
    case Sport::kFencing: return rewards::Kernel::kFencing;
    case Sport::kBoxing: return rewards::Kernel::kBoxing;
    case Sport::kPenaltyKick: return rewards::Kernel::kPenaltyKick;
    case Sport::kSoccer: return rewards::Kernel::kSoccerMatch;
    case Sport::kFreeThrow: return rewards::Kernel::kFreeThrow;
  }
  return rewards::Kernel::kHighJump;
}

void Curriculum::validate() const {
  if (mode == Mode::kLadder) {
    if (levels.empty()) config_error("ladder curriculum needs at least one level");
    for (size_t i = 1; i < levels.size(); ++i)
      if (!(levels[i] > levels[i - 1])) config_error("ladder levels must be strictly increasing");
  } else if (mode == Mode::kUniform) {
    if (!(lo <= hi)) config_error("uniform curriculum needs lo <= hi");
  }
}

double Curriculum::sample(Rng& rng, double fallback) const {
  switch (mode) {
    case Mode::kOff: return fallback;
    case Mode::kLadder: return levels[rng.below(levels.size())];
    case Mode::kUniform: return rng.uniform(lo, hi);
  }
  return fallback;
}

void SportConfig::validate() const {
  if (agents < 1) config_error("agents must be >= 1");
  if (!(time_limit > 0.0)) config_error("time_limit must be positive");
  for (const auto& f : kDoubleFields) {
    const double v = arena.*f.member;
    if (!std::isfinite(v) || v < 0.0) config_error(std::string("arena.") + f.name + " must be >= 0");
  }
  if (arena.hurdle_count < 0 || arena.heightmap_size < 1) config_error("bad arena integer");
  if (arena.terrain_wavelength <= 0.0) config_error("terrain wavelength must be positive");
  curriculum.validate();
}

std::string SportConfig::to_json() const {
  json doc;
  doc["env"] = env;
  doc["sport"] = std::string(sport_name(sport));
  doc["agents"] = agents;
  doc["skeleton"] = skeleton;
  doc["time_limit"] = time_limit;
  doc["literal_throw_velocity"] = literal_throw_velocity;
  doc["golf_pred_to_ball"] = golf_pred_to_ball;
  doc["self_serve"] = self_serve;
  json c;
  c["mode"] = mode_name(curriculum.mode);
  c["levels"] = curriculum.levels;
  c["lo"] = curriculum.lo;
  c["hi"] = curriculum.hi;
  doc["curriculum"] = c;
  json w = json::object();
  const auto& info = rewards::kernel_info(reward_kernel(sport));
  for (int i = 0; i < info.weight_count; ++i) w[std::string(info.weight_names[i])] = weights[i];
  doc["weights"] = w;
  json a = json::object();
  for (const auto& f : kIntFields) a[f.name] = arena.*f.member;
  for (const auto& f : kDoubleFields) a[f.name] = arena.*f.member;
  doc["arena"] = a;
  return doc.dump(2);
}

std::uint64_t fnv1a(const void* data, size_t size, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t SportConfig::hash() const {
  const std::string s = to_json();
  return fnv1a(s.data(), s.size());
}

const std::vector<std::string>& env_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& e : kEnvs) v.emplace_back(e.id);
    return v;
  }();
  return ids;
}

SportConfig default_config(std::string_view env_id) {
  for (const auto& e : kEnvs) {
    if (env_id != e.id) continue;
    SportConfig cfg;
    cfg.env = e.id;
    cfg.sport = e.sport;
    cfg.agents = e.agents;
    cfg.skeleton = e.skeleton;
    cfg.time_limit = e.time_limit;
    cfg.weights = rewards::kernel_info(reward_kernel(e.sport)).defaults;
    if (e.sport == Sport::kHighJump) {
      cfg.curriculum.mode = Curriculum::Mode::kLadder;
      cfg.curriculum.levels = {0.5, 1.0, 1.5, 2.0};
    } else if (e.sport == Sport::kHurdling) {
      cfg.curriculum.mode = Curriculum::Mode::kUniform;
      cfg.curriculum.lo = 0.0;
      cfg.curriculum.hi = 1.167;
    }
    cfg.self_serve = e.agents == 1;
    return cfg;
  }
  config_error("unknown environment '" + std::string(env_id) + "'");
}

void apply_overrides(SportConfig* cfg, std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    config_error(std::string("config document: ") + e.what());
  }
  if (!doc.is_object()) config_error("config document must be an object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    if (key == "env" || key == "sport") {
      if (get_as<std::string>(v, key) != (key == "env" ? cfg->env : std::string(sport_name(cfg->sport))))
        config_error("config document targets a different " + key);
    } else if (key == "agents") {
      cfg->agents = get_as<int>(v, key);
    } else if (key == "skeleton") {
      cfg->skeleton = get_as<std::string>(v, key);
    } else if (key == "time_limit") {
      cfg->time_limit = get_as<double>(v, key);
    } else if (key == "literal_throw_velocity") {
      cfg->literal_throw_velocity = get_as<bool>(v, key);
    } else if (key == "golf_pred_to_ball") {
      cfg->golf_pred_to_ball = get_as<bool>(v, key);
    } else if (key == "self_serve") {
      cfg->self_serve = get_as<bool>(v, key);
    } else if (key == "curriculum") {
      for (auto c = v.begin(); c != v.end(); ++c) {
        if (c.key() == "mode") {
          const auto m = get_as<std::string>(c.value(), "curriculum.mode");
          if (m == "off") cfg->curriculum.mode = Curriculum::Mode::kOff;
          else if (m == "ladder") cfg->curriculum.mode = Curriculum::Mode::kLadder;
          else if (m == "uniform") cfg->curriculum.mode = Curriculum::Mode::kUniform;
          else config_error("unknown curriculum mode '" + m + "'");
        } else if (c.key() == "levels") {
          cfg->curriculum.levels = get_as<std::vector<double>>(c.value(), "curriculum.levels");
        } else if (c.key() == "lo") {
          cfg->curriculum.lo = get_as<double>(c.value(), "curriculum.lo");
        } else if (c.key() == "hi") {
          cfg->curriculum.hi = get_as<double>(c.value(), "curriculum.hi");
        } else {
          config_error("unknown curriculum key '" + c.key() + "'");
        }
      }
    } else if (key == "weights") {
      const auto kernel = reward_kernel(cfg->sport);
      for (auto w = v.begin(); w != v.end(); ++w) {
        const int slot = rewards::weight_slot(kernel, w.key());
        if (slot < 0) config_error("unknown reward weight '" + w.key() + "'");
        cfg->weights[slot] = get_as<double>(w.value(), "weights." + w.key());
      }
    } else if (key == "arena") {
      for (auto a = v.begin(); a != v.end(); ++a) {
        bool found = false;
        for (const auto& f : kDoubleFields) {
          if (a.key() == f.name) {
            cfg->arena.*f.member = get_as<double>(a.value(), "arena." + a.key());
            found = true;
          }
        }
        for (const auto& f : kIntFields) {
          if (a.key() == f.name) {
            cfg->arena.*f.member = get_as<int>(a.value(), "arena." + a.key());
            found = true;
          }
        }
        if (!found) config_error("unknown arena key '" + a.key() + "'");
      }
    } else {
      config_error("unknown config key '" + key + "'");
    }
  }
  cfg->validate();
}

SportConfig load_config(std::string_view env_id, const std::string& override_path,
                        const std::string& root) {
  SportConfig cfg = default_config(env_id);
  std::string dir = root;
  if (dir.empty()) {
    if (const char* env = std::getenv("SPORTSIM_CONFIG_ROOT")) dir = env;
  }
  if (!dir.empty()) {
    const auto p = std::filesystem::path(dir) / (std::string(env_id) + ".json");
    if (std::filesystem::exists(p)) apply_overrides(&cfg, read_file(p));
  }
  if (!override_path.empty()) apply_overrides(&cfg, read_file(override_path));
  cfg.validate();
  return cfg;
}

}  // namespace sportsim
