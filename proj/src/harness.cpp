#include "sportsim/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "sportsim/bridge.hpp"
#include "sportsim/policies.hpp"
#include "sportsim/rng.hpp"

namespace sportsim::harness {

namespace {

using envs::BatchEnv;
using envs::Env;
using trajectory::RecordKind;
using trajectory::StepRecord;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  f << text;
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<size_t>(std::ceil(q * static_cast<double>(v.size()))) - 1;
  return v[std::min(idx, v.size() - 1)];
}

std::unique_ptr<policies::Policy> resolve_policy(const std::string& source, std::uint64_t seed) {
  if (source.rfind("tcp://", 0) == 0) {
    const auto ep = bridge::parse_endpoint(source);
    if (!ep) throw Error(ErrorCode::kConfiguration, "bad policy endpoint '" + source + "'");
    return bridge::make_remote_policy(*ep);
  }
  return policies::make_policy(source, seed);
}

}  // namespace

void RunSpec::validate() const {
  if (batch < 1) throw Error(ErrorCode::kConfiguration, "batch must be >= 1");
  if (workers < 1) throw Error(ErrorCode::kConfiguration, "workers must be >= 1");
  if (trials < 1) throw Error(ErrorCode::kConfiguration, "trials must be >= 1");
  if (!config && env.empty()) throw Error(ErrorCode::kConfiguration, "no environment given");
}

SportConfig RunSpec::resolve_config() const {
  if (config) {
    config->validate();
    return *config;
  }
  return load_config(env, config_path, config_root);
}

trajectory::LogHeader make_header(const SportConfig& cfg, const std::string& policy,
                                  std::uint64_t seed) {
  const Env probe(cfg);
  trajectory::LogHeader h;
  h.engine_version = std::string(trajectory::engine_version());
  h.env = cfg.env;
  h.policy = policy;
  h.config_hash = cfg.hash();
  h.seed = seed;
  h.agents = static_cast<std::uint32_t>(probe.agents());
  h.obs_dim = static_cast<std::uint32_t>(probe.obs_dim());
  h.action_dim = static_cast<std::uint32_t>(probe.action_dim());
  h.config_json = cfg.to_json();
  h.skeleton_json = skeleton_to_json(probe.skeleton());
  return h;
}

StepRecord make_record(const Env& env, RecordKind kind, std::uint64_t trial, const float* obs,
                       const float* actions) {
  StepRecord r;
  r.kind = kind;
  r.trial = trial;
  r.step = static_cast<std::uint32_t>(env.snapshot().step);
  r.obs.assign(obs, obs + static_cast<size_t>(env.agents()) * env.obs_dim());
  if (kind == RecordKind::kStep) {
    r.actions.assign(actions, actions + static_cast<size_t>(env.agents()) * env.action_dim());
    for (int a = 0; a < env.agents(); ++a) {
      const auto& b = env.reward(a);
      trajectory::RewardRecord rr;
      for (int i = 0; i < b.size(); ++i) {
        rr.values.push_back(static_cast<float>(b[i].value));
        rr.weights.push_back(static_cast<float>(b[i].weight));
      }
      rr.total = static_cast<float>(b.total());
      r.rewards.push_back(std::move(rr));
    }
    r.done = env.done() ? 1 : 0;
    r.reason = static_cast<std::uint8_t>(env.reason());
  }
  const auto& m = env.match();
  for (int s = 0; s < 2; ++s) {
    r.score[s] = m.score[s];
    r.hits[s] = m.hits[s];
  }
  return r;
}

EvalResult run_eval(const RunSpec& spec) {
  spec.validate();
  EvalResult out;
  out.config = spec.resolve_config();
  const SportConfig& cfg = out.config;
  const auto trials = static_cast<std::uint64_t>(spec.trials);
  const int slots = static_cast<int>(std::min<std::uint64_t>(spec.batch, trials));

  BatchEnv batch(cfg, slots, spec.workers);
  batch.set_auto_reset(false);
  batch.set_trial_limit(trials);
  const auto policy = resolve_policy(spec.policy, spec.seed);
  if (spec.log_trajectories) out.log.emplace(make_header(cfg, spec.policy, spec.seed));

  const int A = batch.agents();
  const size_t obs_stride = static_cast<size_t>(A) * batch.obs_dim();
  const size_t act_stride = static_cast<size_t>(A) * batch.action_dim();
  std::vector<float> actions(slots * act_stride, 0.0f);
  std::vector<std::uint8_t> active(slots, 0);
  std::vector<std::uint64_t> trial_of(slots, 0);
  out.episodes.assign(trials, envs::EpisodeSummary{});

  auto log_resets = [&](const std::vector<std::uint8_t>& only) {
    if (!out.log) return;
    for (int i = 0; i < slots; ++i) {
      if (!only[i] || batch.idle(i) || batch.env(i).done()) continue;
      out.log->add(make_record(batch.env(i), RecordKind::kReset, batch.trial(i),
                               batch.observations().data() + i * obs_stride, nullptr));
    }
  };

  batch.reset(spec.seed, 0);
  log_resets(std::vector<std::uint8_t>(slots, 1));

  std::uint64_t completed = 0;
  while (completed < trials) {
    for (int i = 0; i < slots; ++i) {
      float* a = actions.data() + i * act_stride;
      active[i] = !batch.idle(i) && !batch.env(i).done();
      trial_of[i] = batch.trial(i);
      if (active[i]) policy->act(batch.env(i), trial_of[i], a);
      else std::fill(a, a + act_stride, 0.0f);
    }
    batch.step(actions);
    std::vector<std::uint8_t> finished(slots, 0);
    for (int i = 0; i < slots; ++i) {
      if (!active[i]) continue;
      const Env& env = batch.env(i);
      if (out.log)
        out.log->add(make_record(env, RecordKind::kStep, trial_of[i],
                                 batch.observations().data() + i * obs_stride,
                                 actions.data() + i * act_stride));
      if (!batch.dones()[i]) continue;
      finished[i] = 1;
      out.episodes[trial_of[i]] = batch.finished(i);
      if (batch.last_reason(i) == envs::TerminationReason::kSimulationFault) ++out.faults;
      ++completed;
    }
    if (batch.reset_finished() > 0) log_resets(finished);
  }

  // Trial order keeps the accumulated sums independent of scheduling.
  std::map<double, metrics::MetricsAccumulator> by_level;
  for (const auto& ep : out.episodes) {
    const double level = cfg.sport == Sport::kHighJump ? ep.level : 0.0;
    by_level.try_emplace(level, cfg.sport).first->second.record(ep);
  }
  for (const auto& [level, acc] : by_level) {
    auto t = metrics::report(acc, cfg, level);
    t.seed = spec.seed;
    t.policy = spec.policy;
    out.tables.push_back(std::move(t));
  }
  return out;
}

std::string EvalResult::text() const {
  std::string s;
  for (const auto& t : tables) s += metrics::to_text(t);
  if (faults > 0) s += "simulation faults: " + std::to_string(faults) + "\n";
  return s;
}

std::string EvalResult::csv() const {
  std::string s;
  for (const auto& t : tables) s += metrics::to_csv(t);
  return s;
}

void write_outputs(const RunSpec& spec, const EvalResult& result) {
  if (spec.out_dir.empty()) return;
  const std::filesystem::path dir(spec.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "metrics.csv", result.csv());
  write_text(dir / "metrics.txt", result.text());
  if (result.log) result.log->write((dir / "trajectories.bin").string());
}

BenchReport run_bench(const BenchSpec& spec) {
  if (spec.batch < 1 || spec.workers < 1)
    throw Error(ErrorCode::kConfiguration, "bench needs batch >= 1 and workers >= 1");
  const SportConfig cfg = spec.config ? *spec.config : default_config(spec.env);
  BatchEnv batch(cfg, spec.batch, spec.workers);
  batch.reset(spec.seed, 0);

  const size_t n = static_cast<size_t>(batch.size()) * batch.agents() * batch.action_dim();
  std::vector<float> actions(n);
  Rng rng(spec.seed);
  auto refill = [&] {
    for (auto& a : actions) a = static_cast<float>(rng.uniform(-1.0, 1.0));
  };
  for (int i = 0; i < spec.warmup_steps; ++i) {
    refill();
    batch.step(actions);
  }

  using clock = std::chrono::steady_clock;
  std::vector<double> lat;
  lat.reserve(spec.max_steps > 0 ? spec.max_steps : 1 << 16);
  const std::uint64_t first_trial = batch.next_trial();
  const std::uint64_t alloc0 = allocation_count();
  double timed = 0.0;
  std::int64_t steps = 0;
  const auto wall0 = clock::now();
  for (;;) {
    if (spec.max_steps > 0 ? steps >= spec.max_steps
                           : std::chrono::duration<double>(clock::now() - wall0).count() >= spec.seconds)
      break;
    refill();
    const auto t0 = clock::now();
    batch.step(actions);
    const double dt = std::chrono::duration<double>(clock::now() - t0).count();
    timed += dt;
    if (lat.size() < lat.capacity()) lat.push_back(dt);
    ++steps;
  }
  const std::uint64_t alloc1 = allocation_count();

  BenchReport r;
  r.env = cfg.env;
  r.batch = batch.size();
  r.workers = batch.workers();
  r.batch_steps = steps;
  r.seconds = timed;
  r.env_steps_per_sec = timed > 0.0 ? static_cast<double>(steps) * batch.size() / timed : 0.0;
  r.allocations = alloc1 - alloc0;
  r.episodes = batch.next_trial() - first_trial;
  r.p50_ms = percentile(lat, 0.50) * 1e3;
  r.p99_ms = percentile(lat, 0.99) * 1e3;
  return r;
}

std::string BenchReport::text() const {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%s batch=%d workers=%d steps=%lld time=%.3fs\n"
                "env-steps/s=%.0f p50=%.3fms p99=%.3fms allocations=%llu episodes=%llu\n",
                env.c_str(), batch, workers, static_cast<long long>(batch_steps), seconds,
                env_steps_per_sec, p50_ms, p99_ms, static_cast<unsigned long long>(allocations),
                static_cast<unsigned long long>(episodes));
  return buf;
}

ReplayVerdict replay(const trajectory::TrajectoryLog& log) {
  const auto& h = log.header;
  if (h.engine_version != trajectory::engine_version())
    throw Error(ErrorCode::kIncompatible, "log written by engine " + h.engine_version);
  SportConfig cfg = default_config(h.env);
  apply_overrides(&cfg, h.config_json);
  cfg.validate();
  if (cfg.hash() != h.config_hash)
    throw Error(ErrorCode::kIncompatible, "embedded config does not match the logged hash");

  ReplayVerdict v;
  std::optional<Env> env;
  std::vector<float> obs;
  std::uint64_t trial = 0;
  auto fail = [&](const StepRecord& r, const std::string& what) {
    v.match = false;
    std::ostringstream os;
    os << "trial " << r.trial << " step " << r.step << ": " << what;
    v.detail = os.str();
  };
  for (const auto& r : log.records) {
    ++v.records;
    if (r.kind == RecordKind::kReset) {
      if (!env) env.emplace(cfg);
      trial = r.trial;
      env->reset(derive_seed(h.seed, trial));
      ++v.episodes;
    } else {
      if (!env || r.trial != trial) {
        fail(r, "step record without a preceding reset");
        return v;
      }
      if (r.actions.size() != static_cast<size_t>(env->agents()) * env->action_dim()) {
        fail(r, "action block has the wrong length");
        return v;
      }
      try {
        env->step(r.actions);
      } catch (const Error& e) {
        fail(r, std::string("step raised: ") + e.what());
        return v;
      }
    }
    obs.resize(static_cast<size_t>(env->agents()) * env->obs_dim());
    env->observe(obs.data());
    const StepRecord mine = make_record(*env, r.kind, r.trial, obs.data(), r.actions.data());
    if (!trajectory::same_bits(mine, r)) {
      fail(r, "record differs");
      return v;
    }
  }
  return v;
}

ReplayVerdict replay_file(const std::string& path) { return replay(trajectory::read_log(path)); }

}  // namespace sportsim::harness
