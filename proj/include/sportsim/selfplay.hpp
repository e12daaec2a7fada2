#pragma once

// Alternating-freeze self-play for two-sided sports. One slot trains while
// the other is frozen; every phase_length steps the roles swap and the slot
// that just stopped training is snapshotted into a bounded FIFO store.
//
// The schedule never owns policies. Handles are opaque ids minted by the
// caller's training side; the schedule only decides which one plays.

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

namespace sportsim::selfplay {

enum class Slot : std::uint8_t { kA = 0, kB = 1 };
enum class OpponentRule : std::uint8_t { kLatest, kUniform };

inline Slot other(Slot s) { return s == Slot::kA ? Slot::kB : Slot::kA; }

struct PolicyHandle {
  Slot slot = Slot::kA;
  std::uint64_t version = 0;  // phases this slot has finished training
  bool operator==(const PolicyHandle&) const = default;
};

struct Snapshot {
  std::uint64_t id = 0;
  PolicyHandle policy;
  std::uint64_t created_step = 0;
  std::uint64_t content_hash = 0;
  bool operator==(const Snapshot&) const = default;
};

struct ScheduleConfig {
  std::uint64_t phase_length = 2'000'000;
  int capacity = 8;
  OpponentRule rule = OpponentRule::kLatest;

  void validate() const;  // kConfiguration for phase_length 0 or capacity < 1
};

class SelfPlaySchedule {
 public:
  explicit SelfPlaySchedule(ScheduleConfig cfg = {});

  const ScheduleConfig& config() const { return cfg_; }
  Slot active() const { return active_; }
  Slot frozen() const { return other(active_); }
  std::uint64_t step() const { return step_; }
  // Live handle of a slot (its current version).
  PolicyHandle live(Slot s) const { return {s, versions_[static_cast<int>(s)]}; }
  const std::deque<Snapshot>& store() const { return store_; }

  // Moves to `global_step` (monotone; kDomain otherwise), swapping once per
  // phase boundary crossed. Each swap snapshots the slot that was training.
  void advance(std::uint64_t global_step);

  // Opponent for the trainable slot. kLatest returns the live frozen slot;
  // kUniform draws from the store, seeded, and falls back to the live frozen
  // slot when the store is empty.
  PolicyHandle opponent_for(std::uint64_t seed) const;

  // Pure function of (config, global_step): the slot active at that step.
  static Slot active_at(const ScheduleConfig& cfg, std::uint64_t global_step);

  // One line per snapshot: "<id> <slot> <version> <created_step> <hash hex>".
  std::string manifest() const;
  void write_manifest(const std::string& path) const;

 private:
  void swap_at(std::uint64_t boundary_step);

  ScheduleConfig cfg_;
  Slot active_ = Slot::kA;
  std::uint64_t step_ = 0;
  std::uint64_t versions_[2] = {0, 0};
  std::uint64_t next_id_ = 0;
  std::deque<Snapshot> store_;
};

}  // namespace sportsim::selfplay
