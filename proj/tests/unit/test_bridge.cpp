#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <fstream>
#include <future>
#include <thread>

#include "expect_code.hpp"
#include "sportsim/bridge.hpp"
#include "sportsim/harness.hpp"

namespace {

using namespace sportsim;
using namespace sportsim::bridge;

std::vector<std::uint8_t> read_fixture() {
  std::ifstream f(std::string(SPORTSIM_FIXTURE_DIR) + "/bridge_conformance.bin", std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::span<const float> as_span(const Array& a) { return a.data; }

TEST(BridgeCodec, RoundTrip) {
  BridgeMessage m{kVersion, Kind::kStep, 3, {}};
  m.arrays.push_back({2, 3, {1, 2, 3, 4, 5, -0.0f}});
  m.arrays.push_back({0, 7, {}});
  m.arrays.push_back(seed_array(0xfedcba9876543210ull));
  const auto bytes = encode(m);
  EXPECT_EQ(bytes.size(), kHeaderBytes + 4 + (8 + 24) + 8 + (8 + 16));
  EXPECT_EQ(std::memcmp(bytes.data(), "SPBR", 4), 0);
  EXPECT_EQ(decode(bytes), m);
  EXPECT_EQ(seed_from(decode(bytes).arrays[2]), 0xfedcba9876543210ull);
}

TEST(BridgeCodec, RejectsMalformedFrames) {
  const auto good = encode(reset_request(2, 9));
  auto bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_CODE(decode(bad_magic), ErrorCode::kProtocol);
  auto bad_kind = good;
  bad_kind[6] = 9;
  EXPECT_CODE(decode(bad_kind), ErrorCode::kProtocol);
  std::vector<std::uint8_t> short_frame(good.begin(), good.end() - 1);
  EXPECT_CODE(decode(short_frame), ErrorCode::kProtocol);
  auto long_frame = good;
  long_frame.push_back(0);
  EXPECT_CODE(decode(long_frame), ErrorCode::kProtocol);
  auto bad_shape = good;
  bad_shape[kHeaderBytes + 4] = 2;  // rows of the seed array
  EXPECT_CODE(decode(bad_shape), ErrorCode::kProtocol);
  Array not_seed{1, 4, {1.5f, 0, 0, 0}};
  EXPECT_CODE(seed_from(not_seed), ErrorCode::kProtocol);
}

TEST(BridgeCodec, ErrorReplies) {
  const auto r = error_reply(ErrorCode::kInvalidAction);
  EXPECT_EQ(r.kind, Kind::kObs);
  EXPECT_EQ(r.n, 0u);
  EXPECT_EQ(error_of(r), ErrorCode::kInvalidAction);
  EXPECT_FALSE(error_of(reset_request(1, 0)).has_value());
}

TEST(BridgeCodec, Endpoints) {
  const auto e = parse_endpoint("tcp://127.0.0.1:5555");
  ASSERT_TRUE(e);
  EXPECT_EQ(e->host, "127.0.0.1");
  EXPECT_EQ(e->port, 5555);
  EXPECT_TRUE(parse_endpoint("localhost:80"));
  EXPECT_FALSE(parse_endpoint("tcp://nohost"));
  EXPECT_FALSE(parse_endpoint("tcp://h:99999"));
}

TEST(BridgeFixture, MatchesCurrentEngine) {
  const auto fixture = read_fixture();
  ASSERT_FALSE(fixture.empty());
  EXPECT_EQ(fixture, conformance_stream());
}

TEST(BridgeFixture, ParsesAndReencodes) {
  const auto fixture = read_fixture();
  const auto msgs = decode_stream(fixture);
  ASSERT_EQ(msgs.size(), 10u);
  std::vector<std::uint8_t> again;
  for (const auto& m : msgs) {
    const auto b = encode(m);
    again.insert(again.end(), b.begin(), b.end());
  }
  EXPECT_EQ(again, fixture);
  // Shapes of the reference session.
  EXPECT_EQ(msgs[1].arrays.size(), 4u);
  EXPECT_EQ(msgs[1].arrays[3].data, (std::vector<float>{
                                        static_cast<float>(msgs[1].arrays[0].cols),
                                        static_cast<float>(msgs[2].arrays[0].cols), 1.0f, 1.0f}));
  EXPECT_EQ(error_of(msgs[7]), ErrorCode::kProtocol);
  EXPECT_EQ(msgs[9].kind, Kind::kClose);
}

TEST(BridgeFixture, FreshServerReproducesReplies) {
  const auto msgs = decode_stream(read_fixture());
  Server server(default_config("penalty_kick"));
  for (size_t i = 0; i + 1 < msgs.size(); i += 2)
    EXPECT_EQ(server.handle(msgs[i]), msgs[i + 1]) << "request " << i / 2;
  EXPECT_TRUE(server.closed());
}

TEST(BridgeServer, MatchesInProcessBatchBitwise) {
  SportConfig cfg = default_config("soccer_1v1");
  cfg.time_limit = 0.5;
  const std::uint32_t n = 2;
  Server server(cfg);
  envs::BatchEnv local(cfg, n);
  const auto reset = server.handle(reset_request(n, 31));
  local.reset(31);
  ASSERT_EQ(reset.arrays[0].data.size(), local.observations().size());
  EXPECT_TRUE(std::equal(local.observations().begin(), local.observations().end(),
                         reset.arrays[0].data.begin()));
  const std::uint32_t rows = n * local.agents(), cols = local.action_dim();
  Rng rng(4);
  std::vector<float> a(static_cast<size_t>(rows) * cols);
  int episodes = 0;
  while (episodes < 10) {
    for (float& x : a) x = static_cast<float>(rng.uniform(-1, 1));
    const auto reply = server.handle(step_request(n, rows, cols, a));
    ASSERT_FALSE(error_of(reply));
    local.step(a);
    const auto same = [](std::span<const float> x, const std::vector<float>& y) {
      return x.size() == y.size() && std::memcmp(x.data(), y.data(), y.size() * 4) == 0;
    };
    ASSERT_TRUE(same(local.observations(), reply.arrays[0].data));
    ASSERT_TRUE(same(local.rewards(), reply.arrays[1].data));
    for (std::uint32_t i = 0; i < n; ++i) {
      ASSERT_EQ(static_cast<float>(local.dones()[i]), reply.arrays[2].data[i]);
      episodes += local.dones()[i];
    }
  }
}

TEST(BridgeServer, RejectsBadRequestsThenRecovers) {
  Server server(default_config("penalty_kick"));
  const auto cols = static_cast<std::uint32_t>(envs::Env(default_config("penalty_kick")).action_dim());
  std::vector<float> a(2 * cols, 0.0f);
  EXPECT_EQ(error_of(server.handle(step_request(2, 2, cols, a))), ErrorCode::kInvalidState);
  server.handle(reset_request(2, 1));
  std::vector<float> three(3 * cols, 0.0f);
  EXPECT_EQ(error_of(server.handle(step_request(3, 3, cols, three))), ErrorCode::kProtocol);
  EXPECT_EQ(error_of(server.handle(step_request(2, 2, cols - 1, std::span(a).first(2 * (cols - 1))))),
            ErrorCode::kProtocol);
  BridgeMessage obs_req{kVersion, Kind::kObs, 2, {}};
  EXPECT_EQ(error_of(server.handle(obs_req)), ErrorCode::kProtocol);
  const auto ok = server.handle(step_request(2, 2, cols, a));
  EXPECT_FALSE(error_of(ok));
  EXPECT_EQ(ok.n, 2u);
}

TEST(BridgeTcp, LoopbackSessionMatchesInProcess) {
  const SportConfig cfg = default_config("penalty_kick");
  std::promise<int> port;
  std::thread srv([&] { serve(cfg, 0, 1, 1, [&](int p) { port.set_value(p); }); });
  const int p = port.get_future().get();
  {
    Connection c = Connection::open("127.0.0.1", p, 10);
    Server ref(cfg);
    const auto msgs = decode_stream(conformance_stream());
    for (size_t i = 0; i + 1 < msgs.size(); i += 2) {
      EXPECT_EQ(c.request(msgs[i]), msgs[i + 1]) << i / 2;
    }
  }
  srv.join();
}

TEST(BridgeTcp, GarbageHeaderGetsAnErrorReply) {
  const SportConfig cfg = default_config("penalty_kick");
  std::promise<int> port;
  std::thread srv([&] { serve(cfg, 0, 1, 1, [&](int p) { port.set_value(p); }); });
  const int p = port.get_future().get();
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(p));
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ASSERT_EQ(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
  const char junk[kHeaderBytes] = "JUNKJUNKJUNKJU";
  ASSERT_EQ(::write(fd, junk, sizeof junk), static_cast<ssize_t>(sizeof junk));
  const auto reply = read_frame(fd);
  ASSERT_TRUE(reply);
  EXPECT_EQ(error_of(*reply), ErrorCode::kProtocol);
  ::close(fd);
  srv.join();
}

// Minimal policy process: answers every obs(1) with constant actions.
void fake_policy_server(int lfd, float value, std::promise<int>* calls) {
  const int fd = ::accept(lfd, nullptr, nullptr);
  int n = 0;
  while (auto m = read_frame(fd)) {
    if (m->kind == Kind::kClose) break;
    const Array& obs = m->arrays.at(0);
    const std::uint32_t cols = 69;
    BridgeMessage reply{kVersion, Kind::kStep, 1, {}};
    reply.arrays.push_back({obs.rows, cols, std::vector<float>(obs.rows * cols, value)});
    write_frame(fd, reply);
    ++n;
  }
  ::close(fd);
  calls->set_value(n);
}

int listen_loopback(int* port) {
  const int lfd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ::bind(lfd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  ::listen(lfd, 1);
  socklen_t len = sizeof addr;
  ::getsockname(lfd, reinterpret_cast<sockaddr*>(&addr), &len);
  *port = ntohs(addr.sin_port);
  return lfd;
}

TEST(BridgeRemotePolicy, DrivesAnEvaluation) {
  int port = 0;
  const int lfd = listen_loopback(&port);
  std::promise<int> calls;
  auto done = calls.get_future();
  std::thread remote(fake_policy_server, lfd, 0.0f, &calls);

  harness::RunSpec s;
  s.env = "long_jump";
  s.config = default_config("long_jump");
  s.config->time_limit = 0.3;
  s.trials = 3;
  s.batch = 2;
  s.policy = "tcp://127.0.0.1:" + std::to_string(port);
  const auto remote_run = harness::run_eval(s);
  remote.join();
  ::close(lfd);
  s.policy = "zero";
  const auto local_run = harness::run_eval(s);
  EXPECT_EQ(done.get(), 3 * 9);
  ASSERT_EQ(remote_run.episodes.size(), 3u);
  for (size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(remote_run.episodes[i].steps, local_run.episodes[i].steps);
    EXPECT_EQ(remote_run.episodes[i].return_sum, local_run.episodes[i].return_sum);
  }
}

TEST(BridgeRemotePolicy, FailsAfterThreeAttempts) {
  int port = 0;
  const int lfd = listen_loopback(&port);
  ::close(lfd);  // nothing listens on the port now
  const auto t0 = std::chrono::steady_clock::now();
  EXPECT_CODE(make_remote_policy({"127.0.0.1", port}, 20), ErrorCode::kConnection);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  // Backoff 20 ms then 40 ms between the three attempts.
  EXPECT_GE(ms, 60);
}

}  // namespace
