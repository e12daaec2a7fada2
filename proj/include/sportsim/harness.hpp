#pragma once

// Episode runner behind the command-line tool: evaluation over a fixed trial
// count, throughput benchmarking and trajectory replay.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sportsim/config.hpp"
#include "sportsim/envs.hpp"
#include "sportsim/metrics.hpp"
#include "sportsim/trajectory.hpp"

namespace sportsim::harness {

struct RunSpec {
  std::string env;
  std::string policy = "random";  // scripted name, "random" or tcp://host:port
  int batch = 64;
  int workers = 1;
  std::int64_t trials = 1000;
  std::uint64_t seed = 0;
  std::string config_path;  // optional override document
  std::string config_root;  // defaults to $SPORTSIM_CONFIG_ROOT
  std::string out_dir;      // empty: nothing written
  bool log_trajectories = false;
  // Takes precedence over env / config_path when set.
  std::optional<SportConfig> config;

  void validate() const;  // kConfiguration
  SportConfig resolve_config() const;
};

struct EvalResult {
  SportConfig config;
  std::vector<envs::EpisodeSummary> episodes;  // indexed by trial
  std::vector<metrics::MetricTable> tables;    // one per high-jump level, else one
  int faults = 0;
  std::optional<trajectory::TrajectoryWriter> log;

  std::string text() const;
  std::string csv() const;
};

// Runs exactly spec.trials episodes. Summaries are accumulated in trial
// order, so results do not depend on batch size or worker count.
EvalResult run_eval(const RunSpec& spec);

// Writes metrics.csv, metrics.txt and (when logged) trajectories.bin under
// spec.out_dir.
void write_outputs(const RunSpec& spec, const EvalResult& result);

struct BenchSpec {
  std::string env = "penalty_kick";
  int batch = 4096;
  int workers = 1;
  double seconds = 5.0;
  int warmup_steps = 20;
  std::int64_t max_steps = 0;  // batch steps; 0 runs for `seconds`
  std::uint64_t seed = 0;
  std::optional<SportConfig> config;
};

struct BenchReport {
  std::string env;
  int batch = 0;
  int workers = 0;
  std::int64_t batch_steps = 0;
  double seconds = 0.0;
  double env_steps_per_sec = 0.0;
  double p50_ms = 0.0;  // per batch step
  double p99_ms = 0.0;
  std::uint64_t allocations = 0;  // during the measured window
  std::uint64_t episodes = 0;

  std::string text() const;
};

// Random-policy throughput. Only BatchEnv::step is timed; action generation
// is excluded.
BenchReport run_bench(const BenchSpec& spec);

// Global operator new calls since process start.
std::uint64_t allocation_count();

struct ReplayVerdict {
  bool match = true;
  std::uint64_t episodes = 0;
  std::uint64_t records = 0;
  std::string detail;  // first mismatch
};

// Re-executes every logged trial from its seed and logged actions and
// compares each record bitwise. Throws kIncompatible when the embedded
// config does not hash to the logged value.
ReplayVerdict replay(const trajectory::TrajectoryLog& log);
ReplayVerdict replay_file(const std::string& path);

// Record of the environment's current state, as written to logs.
trajectory::StepRecord make_record(const envs::Env& env, trajectory::RecordKind kind,
                                   std::uint64_t trial, const float* obs, const float* actions);

trajectory::LogHeader make_header(const SportConfig& cfg, const std::string& policy,
                                  std::uint64_t seed);

}  // namespace sportsim::harness
