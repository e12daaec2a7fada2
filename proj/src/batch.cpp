#include <algorithm>

#include "sportsim/envs.hpp"

namespace sportsim::envs {

BatchEnv::BatchEnv(const SportConfig& cfg, int envs, int workers) : cfg_(cfg) {
  if (envs < 1) throw Error(ErrorCode::kConfiguration, "batch needs at least one environment");
  if (workers < 1) throw Error(ErrorCode::kConfiguration, "batch needs at least one worker");
  envs_.reserve(envs);
  for (int i = 0; i < envs; ++i) {
    envs_.emplace_back(cfg);
    if (envs_.back().config().sport != envs_.front().config().sport)
      throw Error(ErrorCode::kConfiguration, "heterogeneous batch");
  }
  agents_ = envs_[0].agents();
  obs_dim_ = envs_[0].obs_dim();
  action_dim_ = envs_[0].action_dim();
  workers_ = std::min(workers, envs);
  obs_.assign(static_cast<size_t>(envs) * agents_ * obs_dim_, 0.0f);
  rewards_.assign(static_cast<size_t>(envs) * agents_, 0.0f);
  dones_.assign(envs, 0);
  reasons_.assign(envs, TerminationReason::kNone);
  finished_.assign(envs, EpisodeSummary{});
  trials_.assign(envs, 0);
  needs_reset_.assign(envs, 0);
  idle_.assign(envs, 0);
  for (int w = 1; w < workers_; ++w) threads_.emplace_back([this, w] { worker_loop(w); });
}

BatchEnv::~BatchEnv() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    stop_ = true;
  }
  cv_start_.notify_all();
  for (auto& t : threads_) t.join();
}

void BatchEnv::write_obs(int slot) {
  envs_[slot].observe(obs_.data() + static_cast<size_t>(slot) * agents_ * obs_dim_);
}

void BatchEnv::reset(std::uint64_t base_seed, std::uint64_t first_trial) {
  std::vector<std::uint64_t> trials(envs_.size());
  for (size_t i = 0; i < trials.size(); ++i) trials[i] = first_trial + i;
  reset(base_seed, trials);
}

void BatchEnv::reset(std::uint64_t base_seed, std::span<const std::uint64_t> trials) {
  if (trials.size() != envs_.size())
    throw Error(ErrorCode::kConfiguration, "reset needs one trial index per slot");
  base_seed_ = base_seed;
  next_trial_ = 0;
  for (size_t i = 0; i < envs_.size(); ++i) {
    trials_[i] = trials[i];
    next_trial_ = std::max(next_trial_, trials[i] + 1);
    idle_[i] = trials[i] >= trial_limit_ ? 1 : 0;
    needs_reset_[i] = idle_[i] ? 0 : 1;
    dones_[i] = idle_[i];
    reasons_[i] = TerminationReason::kNone;
  }
  std::fill(rewards_.begin(), rewards_.end(), 0.0f);
  parallel(Phase::kReset);
}

void BatchEnv::step(std::span<const float> actions) {
  const size_t expected = envs_.size() * static_cast<size_t>(agents_) * action_dim_;
  if (actions.size() != expected)
    throw Error(ErrorCode::kInvalidAction, "batch action block has " +
                                               std::to_string(actions.size()) + " values, expected " +
                                               std::to_string(expected));
  job_actions_ = actions;
  parallel(Phase::kStep);
  if (auto_reset_) reset_finished();
}

int BatchEnv::reset_finished() {
  // Trial indices are handed out in slot order so the assignment does not
  // depend on the worker partition.
  int n = 0;
  for (size_t i = 0; i < envs_.size(); ++i) {
    if (!dones_[i] || idle_[i] || !envs_[i].done()) continue;
    if (next_trial_ >= trial_limit_) {
      idle_[i] = 1;
      continue;
    }
    trials_[i] = next_trial_++;
    needs_reset_[i] = 1;
    ++n;
  }
  if (n > 0) parallel(Phase::kReset);
  return n;
}

void BatchEnv::run_range(Phase phase, int begin, int end) {
  const size_t act_stride = static_cast<size_t>(agents_) * action_dim_;
  for (int i = begin; i < end; ++i) {
    Env& env = envs_[i];
    if (phase == Phase::kReset) {
      if (!needs_reset_[i]) continue;
      needs_reset_[i] = 0;
      env.reset(derive_seed(base_seed_, trials_[i]));
      write_obs(i);
      continue;
    }
    float* rew = rewards_.data() + static_cast<size_t>(i) * agents_;
    if (idle_[i] || env.done()) {
      std::fill(rew, rew + agents_, 0.0f);
      dones_[i] = 1;
      continue;
    }
    const bool done = env.step(job_actions_.subspan(i * act_stride, act_stride));
    for (int a = 0; a < agents_; ++a) rew[a] = static_cast<float>(env.reward(a).total());
    dones_[i] = done ? 1 : 0;
    if (done) {
      reasons_[i] = env.reason();
      finished_[i] = env.summary();
    }
    write_obs(i);
  }
}

void BatchEnv::parallel(Phase phase) {
  const int n = size();
  if (workers_ == 1) {
    run_range(phase, 0, n);
    return;
  }
  {
    std::lock_guard<std::mutex> lock(mu_);
    job_phase_ = phase;
    pending_ = workers_ - 1;
    ++generation_;
  }
  cv_start_.notify_all();
  std::exception_ptr local;
  try {
    run_range(phase, 0, n / workers_);
  } catch (...) {
    local = std::current_exception();
  }
  std::unique_lock<std::mutex> lock(mu_);
  cv_done_.wait(lock, [this] { return pending_ == 0; });
  if (!local) std::swap(local, job_error_);
  job_error_ = nullptr;
  if (local) std::rethrow_exception(local);
}

void BatchEnv::worker_loop(int w) {
  std::uint64_t seen = 0;
  for (;;) {
    Phase phase;
    {
      std::unique_lock<std::mutex> lock(mu_);
      cv_start_.wait(lock, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
      phase = job_phase_;
    }
    const int n = size();
    std::exception_ptr err;
    try {
      run_range(phase, static_cast<int>(static_cast<long>(n) * w / workers_),
                static_cast<int>(static_cast<long>(n) * (w + 1) / workers_));
    } catch (...) {
      err = std::current_exception();
    }
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (err && !job_error_) job_error_ = err;
      if (--pending_ == 0) cv_done_.notify_one();
    }
  }
}

}  // namespace sportsim::envs
