#pragma once

// Wire protocol for driving a BatchEnv from another process.
//
// Frame, little-endian:
//   magic "SPBR" | u16 version | u8 kind | u32 N | u32 payload_len | payload
// payload:
//   u32 array_count, then per array: u32 rows | u32 cols | rows*cols f32
//
// Requests and replies:
//   reset(N)  [seed 1x4]            -> obs(N) [obs, rewards, dones, spec]
//   step(N)   [actions N*A x act]   -> obs(N) [obs, rewards, dones]
//   close(0)                        -> close(0)
//   error                           -> obs(0) [code 1x1]
// The seed travels as four 16-bit chunks, least significant first, each
// exact in f32. spec is 1x4: obs_dim, action_dim, agents, version.
// Rows of obs are (env, agent) pairs in env-major order.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sportsim/config.hpp"
#include "sportsim/envs.hpp"
#include "sportsim/policies.hpp"

namespace sportsim::bridge {

inline constexpr char kMagic[4] = {'S', 'P', 'B', 'R'};
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 15;
// Frames larger than this are rejected before allocating.
inline constexpr std::uint32_t kMaxPayload = 1u << 30;

enum class Kind : std::uint8_t { kReset = 0, kStep = 1, kObs = 2, kClose = 3 };

struct Array {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<float> data;  // row-major, rows * cols

  bool operator==(const Array&) const = default;
};

struct BridgeMessage {
  std::uint16_t version = kVersion;
  Kind kind = Kind::kObs;
  std::uint32_t n = 0;
  std::vector<Array> arrays;

  bool operator==(const BridgeMessage&) const = default;
};

std::vector<std::uint8_t> encode(const BridgeMessage& m);

// Parses exactly one frame occupying all of `bytes`. Throws kProtocol on a
// bad magic, an unknown kind or a payload that disagrees with its shapes.
BridgeMessage decode(std::span<const std::uint8_t> bytes);

// Splits a byte stream holding back-to-back frames.
std::vector<BridgeMessage> decode_stream(std::span<const std::uint8_t> bytes);

Array seed_array(std::uint64_t seed);
std::uint64_t seed_from(const Array& a);  // kProtocol unless 1x4 of 16-bit integers

BridgeMessage reset_request(std::uint32_t n, std::uint64_t seed);
BridgeMessage step_request(std::uint32_t n, std::uint32_t rows, std::uint32_t cols,
                           std::span<const float> actions);
BridgeMessage close_request();
BridgeMessage error_reply(ErrorCode code);
// The error code carried by an obs(0) reply, if it is one.
std::optional<ErrorCode> error_of(const BridgeMessage& m);

// Engine side of a session. Requests are handled strictly in order; an
// error reply leaves the session as it was.
class Server {
 public:
  explicit Server(SportConfig cfg, int workers = 1);

  BridgeMessage handle(const BridgeMessage& request);
  bool closed() const { return closed_; }
  const envs::BatchEnv* batch() const { return batch_.get(); }

 private:
  BridgeMessage observation(bool with_spec) const;

  SportConfig cfg_;
  int workers_;
  std::unique_ptr<envs::BatchEnv> batch_;
  bool closed_ = false;
};

// Loopback TCP transport. Serves sessions one at a time on 127.0.0.1;
// returns after `sessions` sessions have ended (0 serves forever).
// `on_listen` receives the bound port, useful with port 0.
void serve(const SportConfig& cfg, int port, int workers, int sessions = 0,
           const std::function<void(int)>& on_listen = {});

// Blocking client connection with length-prefixed frame I/O.
class Connection {
 public:
  // Three attempts with exponential backoff from `backoff_ms`; throws
  // kConnection when all fail.
  static Connection open(const std::string& host, int port, int backoff_ms = 100);
  Connection(Connection&& o) noexcept;
  Connection& operator=(Connection&& o) noexcept;
  ~Connection();

  void send(const BridgeMessage& m);
  BridgeMessage receive();
  BridgeMessage request(const BridgeMessage& m) {
    send(m);
    return receive();
  }

 private:
  explicit Connection(int fd) : fd_(fd) {}
  int fd_ = -1;
};

// Frame I/O on a connected socket; receive returns nullopt on a clean EOF
// before the first header byte.
void write_frame(int fd, const BridgeMessage& m);
std::optional<BridgeMessage> read_frame(int fd);

// Parses "tcp://host:port" or "host:port".
struct Endpoint {
  std::string host;
  int port = 0;
};
std::optional<Endpoint> parse_endpoint(const std::string& text);

// Policy served by a remote process: each act() sends obs(1) carrying the
// env's observation block and expects step(1) with the action block back.
std::unique_ptr<policies::Policy> make_remote_policy(const Endpoint& endpoint, int backoff_ms = 100);

// Reference session on the default penalty-kick config with N = 2 and seed
// 7: reset, a zero-action step, a constant-action step, a step with the
// wrong N (rejected), close. Requests and replies are interleaved.
std::vector<std::uint8_t> conformance_stream();

}  // namespace sportsim::bridge
