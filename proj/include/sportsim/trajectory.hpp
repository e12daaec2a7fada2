#pragma once

// Binary trajectory logs: little-endian, length-delimited records, 32-bit
// floats, closed by a trailer holding the record count and an FNV-1a hash of
// every preceding byte. A plain-text schema sidecar describes the layout.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace sportsim::trajectory {

inline constexpr char kMagic[4] = {'S', 'P', 'T', 'L'};
inline constexpr char kTrailerMagic[4] = {'S', 'P', 'T', 'E'};
inline constexpr std::uint16_t kFormatVersion = 1;

std::string_view engine_version();

struct LogHeader {
  std::uint16_t format_version = kFormatVersion;
  std::string engine_version;
  std::string env;
  std::string policy;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;  // base seed; trial k runs derive_seed(seed, k)
  std::uint32_t agents = 0;
  std::uint32_t obs_dim = 0;
  std::uint32_t action_dim = 0;
  std::string config_json;
  std::string skeleton_json;
};

enum class RecordKind : std::uint8_t { kReset = 0, kStep = 1 };

struct RewardRecord {
  std::vector<float> values;
  std::vector<float> weights;
  float total = 0.0f;
  bool operator==(const RewardRecord&) const = default;
};

struct StepRecord {
  RecordKind kind = RecordKind::kStep;
  std::uint64_t trial = 0;
  std::uint32_t step = 0;
  std::vector<float> obs;      // agents * obs_dim, after the step (or reset)
  std::vector<float> actions;  // agents * action_dim, empty for resets
  std::vector<RewardRecord> rewards;  // per agent, empty for resets
  std::uint8_t done = 0;
  std::uint8_t reason = 0;
  std::int32_t score[2] = {0, 0};
  std::int32_t hits[2] = {0, 0};
};

// Bitwise equality (float payloads compared by bit pattern).
bool same_bits(const StepRecord& a, const StepRecord& b);

std::vector<std::uint8_t> encode_record(const StepRecord& r);

// Buffers records per trial and writes them in ascending trial order, so the
// file does not depend on which slot or worker ran a trial.
class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(LogHeader header) : header_(std::move(header)) {}

  void add(const StepRecord& r);
  std::size_t records() const { return count_; }
  // Writes the log and "<path>.schema.txt".
  void write(const std::string& path) const;
  std::vector<std::uint8_t> bytes() const;

 private:
  LogHeader header_;
  std::map<std::uint64_t, std::vector<std::uint8_t>> trials_;
  std::size_t count_ = 0;
};

struct TrajectoryLog {
  LogHeader header;
  std::vector<StepRecord> records;
};

// Throws kIntegrity on a bad magic, truncation or hash mismatch, and
// kIncompatible when the format or engine version differs from this build.
TrajectoryLog parse_log(const std::vector<std::uint8_t>& bytes);
TrajectoryLog read_log(const std::string& path);

std::string schema_text();

}  // namespace sportsim::trajectory
