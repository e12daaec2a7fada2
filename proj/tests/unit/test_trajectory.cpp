#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "expect_code.hpp"
#include "sportsim/config.hpp"
#include "sportsim/harness.hpp"
#include "sportsim/trajectory.hpp"

namespace {

using namespace sportsim;
using namespace sportsim::trajectory;

StepRecord sample_record(std::uint64_t trial, std::uint32_t step) {
  StepRecord r;
  r.kind = step == 0 ? RecordKind::kReset : RecordKind::kStep;
  r.trial = trial;
  r.step = step;
  r.obs = {1.5f, -0.0f, 3.25f, static_cast<float>(trial)};
  if (step > 0) {
    r.actions = {0.5f, -0.5f};
    r.rewards = {{{0.1f, 0.2f}, {0.6f, 0.4f}, 0.14f}};
  }
  r.done = step == 2;
  r.reason = r.done ? 3 : 0;
  r.score[0] = 1;
  r.hits[1] = 4;
  return r;
}

LogHeader sample_header() {
  const SportConfig cfg = default_config("long_jump");
  return harness::make_header(cfg, "zero", 42);
}

std::vector<std::uint8_t> sample_log() {
  TrajectoryWriter w(sample_header());
  for (std::uint64_t t : {2u, 0u, 1u})
    for (std::uint32_t s = 0; s < 3; ++s) w.add(sample_record(t, s));
  return w.bytes();
}

void rehash(std::vector<std::uint8_t>* bytes) {
  const std::size_t body = bytes->size() - 20;
  const std::uint64_t h = fnv1a(bytes->data(), body);
  std::memcpy(bytes->data() + bytes->size() - 8, &h, 8);
}

TEST(Trajectory, RoundTripSortedByTrial) {
  const auto bytes = sample_log();
  const TrajectoryLog log = parse_log(bytes);
  EXPECT_EQ(log.header.env, "long_jump");
  EXPECT_EQ(log.header.policy, "zero");
  EXPECT_EQ(log.header.seed, 42u);
  EXPECT_EQ(log.header.config_hash, default_config("long_jump").hash());
  ASSERT_EQ(log.records.size(), 9u);
  for (size_t i = 0; i < 9; ++i) {
    EXPECT_EQ(log.records[i].trial, i / 3);
    EXPECT_TRUE(same_bits(log.records[i], sample_record(i / 3, i % 3))) << i;
  }
}

TEST(Trajectory, SameBitsSeesSignedZero) {
  StepRecord a = sample_record(0, 1), b = a;
  EXPECT_TRUE(same_bits(a, b));
  b.obs[1] = 0.0f;
  EXPECT_FALSE(same_bits(a, b));
}

TEST(Trajectory, OutputIndependentOfInsertionOrder) {
  TrajectoryWriter a(sample_header()), b(sample_header());
  for (std::uint64_t t = 0; t < 3; ++t)
    for (std::uint32_t s = 0; s < 3; ++s) a.add(sample_record(t, s));
  for (std::uint64_t t : {1u, 2u, 0u})
    for (std::uint32_t s = 0; s < 3; ++s) b.add(sample_record(t, s));
  EXPECT_EQ(a.bytes(), b.bytes());
}

TEST(Trajectory, EveryCorruptedByteIsDetected) {
  const auto clean = sample_log();
  for (size_t i = 0; i < clean.size(); ++i) {
    auto bytes = clean;
    bytes[i] ^= 0x10;
    EXPECT_CODE(parse_log(bytes), ErrorCode::kIntegrity);
  }
}

TEST(Trajectory, TruncationIsDetected) {
  const auto clean = sample_log();
  for (size_t n : {size_t{0}, size_t{3}, clean.size() / 2, clean.size() - 1}) {
    std::vector<std::uint8_t> cut(clean.begin(), clean.begin() + n);
    EXPECT_CODE(parse_log(cut), ErrorCode::kIntegrity);
  }
}

TEST(Trajectory, VersionMismatchIsIncompatible) {
  auto bytes = sample_log();
  bytes[4] = static_cast<std::uint8_t>(kFormatVersion + 1);
  rehash(&bytes);
  EXPECT_CODE(parse_log(bytes), ErrorCode::kIncompatible);

  LogHeader h = sample_header();
  h.engine_version = "0.0.0-other";
  TrajectoryWriter w(h);
  w.add(sample_record(0, 0));
  EXPECT_CODE(parse_log(w.bytes()), ErrorCode::kIncompatible);
}

TEST(Trajectory, FileAndSchemaSidecar) {
  const auto dir = std::filesystem::temp_directory_path() / "sportsim_traj";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "t.bin").string();
  TrajectoryWriter w(sample_header());
  w.add(sample_record(0, 0));
  w.write(path);
  EXPECT_EQ(read_log(path).records.size(), 1u);
  std::ifstream f(path + ".schema.txt");
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  EXPECT_EQ(text, schema_text());
  EXPECT_NE(text.find("SPTL"), std::string::npos);
  EXPECT_CODE(read_log((dir / "missing.bin").string()), ErrorCode::kIo);
}

}  // namespace
