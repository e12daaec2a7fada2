#pragma once

// Per-environment configuration: arena constants, reward weights, curriculum
// and episode limits. Every value has a built-in default; JSON documents
// override any subset of keys.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sportsim/rewards.hpp"
#include "sportsim/rng.hpp"

namespace sportsim {

enum class Sport {
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
  kSoccer,
  kFreeThrow,
};

std::string_view sport_name(Sport s);
rewards::Kernel reward_kernel(Sport s);

struct Curriculum {
  enum class Mode { kOff, kLadder, kUniform };
  Mode mode = Mode::kOff;
  std::vector<double> levels;  // ladder
  double lo = 0.0;             // uniform
  double hi = 0.0;

  // Throws kConfiguration: ladder must be non-empty and strictly increasing,
  // uniform needs lo <= hi.
  void validate() const;
  // Returns `fallback` when the curriculum is off.
  double sample(Rng& rng, double fallback) const;
};

struct Arena {
  // Track
  double hurdle_first = 13.72;
  double hurdle_spacing = 9.14;
  int hurdle_count = 10;
  double hurdle_height = 1.067;
  double track_finish = 110.0;
  double track_half_width = 1.22;
  double high_jump_bar_x = 20.0;
  double high_jump_bar_y = 6.0;
  double high_jump_bar_half_length = 2.0;
  double high_jump_bar_height = 1.0;
  double long_jump_line = 20.0;
  // Golf
  double golf_target_min = 0.0;
  double golf_target_max = 20.0;
  double terrain_amplitude = 0.5;
  double terrain_wavelength = 8.0;
  int heightmap_size = 32;
  double heightmap_spacing = 0.25;
  double golf_contact_timeout = 2.0;
  double golf_body_clearance = 0.3;
  double golf_ball_radius = 0.02135;
  double golf_ball_mass = 0.0459;
  double golf_ball_restitution = 0.5;
  double golf_ball_friction = 0.4;
  // Javelin
  double javelin_length = 2.7;
  double javelin_radius = 0.015;
  double javelin_mass = 0.8;
  double javelin_detach_distance = 0.3;
  double javelin_max_deviation = 1.0472;  // rad
  double javelin_release_deadline = 3.0;
  double javelin_min_clearance = 0.1;
  // Racket sports
  double court_length = 23.77;
  double court_width = 8.23;
  double court_net_height = 1.0;
  double tennis_ball_radius = 0.032;
  double tennis_ball_mass = 0.057;
  double tennis_ball_restitution = 0.75;
  double racket_radius = 0.15;
  double racket_offset = 0.35;
  double tennis_speed_min = 12.0;
  double tennis_speed_max = 22.0;
  double table_length = 2.74;
  double table_width = 1.525;
  double table_height = 0.76;
  double table_net_height = 0.1525;
  double table_ball_radius = 0.02;
  double table_ball_mass = 0.0027;
  double table_ball_restitution = 0.9;
  double paddle_radius = 0.08;
  double paddle_offset = 0.12;
  double table_speed_min = 3.0;
  double table_speed_max = 6.0;
  double implement_restitution = 0.8;
  // Combat
  double piste_length = 14.0;
  double piste_width = 2.0;
  double ring_size = 5.0;
  double sword_length = 0.9;
  double glove_radius = 0.08;
  double target_radius = 0.12;
  double point_distance = 0.1;
  double point_force = 50.0;
  double striker_mass = 2.0;
  double combat_spawn_gap = 3.0;
  // Soccer
  double field_length = 32.0;
  double field_width = 20.0;
  double goal_width = 4.0;
  double goal_height = 2.0;
  double soccer_ball_diameter = 0.115;
  double soccer_ball_mass = 0.45;
  double soccer_ball_restitution = 0.6;
  double soccer_ball_friction = 0.3;
  double penalty_agent_distance = 13.0;
  double penalty_ball_distance = 12.0;
  double foot_radius = 0.08;
  // Basketball
  double court_b_length = 29.0;
  double court_b_width = 15.0;
  double hoop_height = 3.0;
  double hoop_radius = 0.2286;
  double free_throw_distance = 4.5;
  double basketball_radius = 0.12;
  double basketball_mass = 0.62;
  double basketball_restitution = 0.8;
};

struct SportConfig {
  std::string env;  // environment id, e.g. "penalty_kick"
  Sport sport = Sport::kHighJump;
  int agents = 1;
  std::string skeleton = "smpl";
  double time_limit = 30.0;
  Arena arena;
  Curriculum curriculum;
  rewards::Weights weights{};
  bool literal_throw_velocity = false;
  bool golf_pred_to_ball = false;
  bool self_serve = true;  // racket sports: relaunch after a legal return

  void validate() const;
  std::string to_json() const;
  // FNV-1a of the canonical JSON form.
  std::uint64_t hash() const;
};

// Registered environment ids, in a stable order.
const std::vector<std::string>& env_ids();

// Built-in defaults for an id. Throws kConfiguration for unknown ids.
SportConfig default_config(std::string_view env_id);

// Applies a JSON object of overrides ({"arena": {...}, "weights": {...},
// "curriculum": {...}, "time_limit": ..., ...}).
void apply_overrides(SportConfig* cfg, std::string_view json_text);

// Defaults, then <root>/<env_id>.json when present, then `override_path`
// when non-empty. `root` defaults to $SPORTSIM_CONFIG_ROOT.
SportConfig load_config(std::string_view env_id, const std::string& override_path = {},
                        const std::string& root = {});

std::uint64_t fnv1a(const void* data, size_t size, std::uint64_t h = 0xcbf29ce484222325ull);

}  // namespace sportsim
