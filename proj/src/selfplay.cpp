#include "sportsim/selfplay.hpp"

#include <cstdio>
#include <fstream>

#include "sportsim/config.hpp"
#include "sportsim/error.hpp"
#include "sportsim/rng.hpp"

namespace sportsim::selfplay {

void ScheduleConfig::validate() const {
  if (phase_length == 0) throw Error(ErrorCode::kConfiguration, "phase_length must be > 0");
  if (capacity < 1) throw Error(ErrorCode::kConfiguration, "snapshot capacity must be >= 1");
}

SelfPlaySchedule::SelfPlaySchedule(ScheduleConfig cfg) : cfg_(cfg) { cfg_.validate(); }

Slot SelfPlaySchedule::active_at(const ScheduleConfig& cfg, std::uint64_t global_step) {
  return (global_step / cfg.phase_length) % 2 == 0 ? Slot::kA : Slot::kB;
}

void SelfPlaySchedule::swap_at(std::uint64_t boundary_step) {
  const Slot done = active_;
  auto& version = versions_[static_cast<int>(done)];
  version += 1;
  Snapshot snap;
  snap.id = next_id_++;
  snap.policy = {done, version};
  snap.created_step = boundary_step;
  const std::uint64_t fields[3] = {static_cast<std::uint64_t>(done), version, boundary_step};
  snap.content_hash = fnv1a(fields, sizeof fields);
  store_.push_back(snap);
  while (static_cast<int>(store_.size()) > cfg_.capacity) store_.pop_front();
  active_ = other(done);
}

void SelfPlaySchedule::advance(std::uint64_t global_step) {
  if (global_step < step_) throw Error(ErrorCode::kDomain, "global step must be monotone");
  const std::uint64_t L = cfg_.phase_length;
  for (std::uint64_t b = (step_ / L + 1) * L; b <= global_step; b += L) swap_at(b);
  step_ = global_step;
}

PolicyHandle SelfPlaySchedule::opponent_for(std::uint64_t seed) const {
  if (cfg_.rule == OpponentRule::kLatest || store_.empty()) return live(frozen());
  Rng rng(derive_seed(seed, step_));
  return store_[rng.below(store_.size())].policy;
}

std::string SelfPlaySchedule::manifest() const {
  std::string out = "# id slot version created_step content_hash\n";
  char line[128];
  for (const auto& s : store_) {
    std::snprintf(line, sizeof line, "%llu %c %llu %llu %016llx\n",
                  static_cast<unsigned long long>(s.id), s.policy.slot == Slot::kA ? 'A' : 'B',
                  static_cast<unsigned long long>(s.policy.version),
                  static_cast<unsigned long long>(s.created_step),
                  static_cast<unsigned long long>(s.content_hash));
    out += line;
  }
  return out;
}

void SelfPlaySchedule::write_manifest(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::kConfiguration, "cannot write manifest " + path);
  f << manifest();
}

}  // namespace sportsim::selfplay
