#include "sportsim/bridge.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <thread>

#include "sportsim/rng.hpp"

static_assert(std::endian::native == std::endian::little, "wire format assumes a little-endian host");

namespace sportsim::bridge {

namespace {

[[noreturn]] void protocol_error(const std::string& what) { throw Error(ErrorCode::kProtocol, what); }

template <class T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

struct Reader {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;

  std::size_t left() const { return bytes.size() - pos; }
  template <class T>
  T get() {
    if (left() < sizeof(T)) protocol_error("frame truncated");
    T v;
    std::memcpy(&v, bytes.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  }
};

std::uint32_t payload_size(const BridgeMessage& m) {
  std::size_t n = 4;
  for (const auto& a : m.arrays) n += 8 + a.data.size() * sizeof(float);
  if (n > kMaxPayload) protocol_error("payload too large");
  return static_cast<std::uint32_t>(n);
}

// Parses the fixed header, returning the payload length.
std::uint32_t parse_header(Reader& r, BridgeMessage* m) {
  char magic[4];
  for (char& c : magic) c = static_cast<char>(r.get<std::uint8_t>());
  if (std::memcmp(magic, kMagic, 4) != 0) protocol_error("bad frame magic");
  m->version = r.get<std::uint16_t>();
  const auto kind = r.get<std::uint8_t>();
  if (kind > static_cast<std::uint8_t>(Kind::kClose)) protocol_error("unknown frame kind");
  m->kind = static_cast<Kind>(kind);
  m->n = r.get<std::uint32_t>();
  const auto len = r.get<std::uint32_t>();
  if (len > kMaxPayload) protocol_error("payload too large");
  return len;
}

void parse_payload(Reader r, BridgeMessage* m) {
  const auto count = r.get<std::uint32_t>();
  m->arrays.clear();
  for (std::uint32_t i = 0; i < count; ++i) {
    Array a;
    a.rows = r.get<std::uint32_t>();
    a.cols = r.get<std::uint32_t>();
    const std::uint64_t n = static_cast<std::uint64_t>(a.rows) * a.cols;
    if (n * sizeof(float) > r.left()) protocol_error("array shape exceeds payload");
    a.data.resize(n);
    if (n) std::memcpy(a.data.data(), r.bytes.data() + r.pos, n * sizeof(float));
    r.pos += n * sizeof(float);
    m->arrays.push_back(std::move(a));
  }
  if (r.left() != 0) protocol_error("payload longer than its arrays");
}

Array matrix(std::uint32_t rows, std::uint32_t cols, std::span<const float> data) {
  Array a;
  a.rows = rows;
  a.cols = cols;
  a.data.assign(data.begin(), data.end());
  return a;
}

bool send_all(int fd, const std::uint8_t* p, std::size_t n) {
  while (n > 0) {
    const ssize_t k = ::send(fd, p, n, MSG_NOSIGNAL);
    if (k < 0 && errno == EINTR) continue;
    if (k <= 0) return false;
    p += k;
    n -= static_cast<std::size_t>(k);
  }
  return true;
}

// Returns bytes read; short only at EOF.
std::size_t recv_all(int fd, std::uint8_t* p, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const ssize_t k = ::recv(fd, p + got, n - got, 0);
    if (k < 0 && errno == EINTR) continue;
    if (k < 0) throw Error(ErrorCode::kConnection, std::string("recv: ") + std::strerror(errno));
    if (k == 0) break;
    got += static_cast<std::size_t>(k);
  }
  return got;
}

}  // namespace

std::vector<std::uint8_t> encode(const BridgeMessage& m) {
  for (const auto& a : m.arrays)
    if (static_cast<std::uint64_t>(a.rows) * a.cols != a.data.size())
      protocol_error("array data does not match its shape");
  const std::uint32_t len = payload_size(m);
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + len);
  out.insert(out.end(), kMagic, kMagic + 4);
  put(out, m.version);
  put(out, static_cast<std::uint8_t>(m.kind));
  put(out, m.n);
  put(out, len);
  put(out, static_cast<std::uint32_t>(m.arrays.size()));
  for (const auto& a : m.arrays) {
    put(out, a.rows);
    put(out, a.cols);
    const auto* p = reinterpret_cast<const std::uint8_t*>(a.data.data());
    out.insert(out.end(), p, p + a.data.size() * sizeof(float));
  }
  return out;
}

BridgeMessage decode(std::span<const std::uint8_t> bytes) {
  Reader r{bytes};
  BridgeMessage m;
  const std::uint32_t len = parse_header(r, &m);
  if (r.left() != len) protocol_error("frame length does not match its header");
  parse_payload(Reader{bytes.subspan(r.pos)}, &m);
  return m;
}

std::vector<BridgeMessage> decode_stream(std::span<const std::uint8_t> bytes) {
  std::vector<BridgeMessage> out;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    Reader r{bytes.subspan(pos)};
    BridgeMessage m;
    const std::uint32_t len = parse_header(r, &m);
    if (r.left() < len) protocol_error("frame truncated");
    out.push_back(decode(bytes.subspan(pos, kHeaderBytes + len)));
    pos += kHeaderBytes + len;
  }
  return out;
}

Array seed_array(std::uint64_t seed) {
  Array a{1, 4, {}};
  for (int i = 0; i < 4; ++i) a.data.push_back(static_cast<float>((seed >> (16 * i)) & 0xffff));
  return a;
}

std::uint64_t seed_from(const Array& a) {
  if (a.rows != 1 || a.cols != 4) protocol_error("seed must be a 1x4 array");
  std::uint64_t seed = 0;
  for (int i = 0; i < 4; ++i) {
    const float v = a.data[i];
    if (!(v >= 0.0f && v <= 65535.0f) || v != std::floor(v)) protocol_error("seed chunk out of range");
    seed |= static_cast<std::uint64_t>(v) << (16 * i);
  }
  return seed;
}

BridgeMessage reset_request(std::uint32_t n, std::uint64_t seed) {
  return {kVersion, Kind::kReset, n, {seed_array(seed)}};
}

BridgeMessage step_request(std::uint32_t n, std::uint32_t rows, std::uint32_t cols,
                           std::span<const float> actions) {
  return {kVersion, Kind::kStep, n, {matrix(rows, cols, actions)}};
}

BridgeMessage close_request() { return {kVersion, Kind::kClose, 0, {}}; }

BridgeMessage error_reply(ErrorCode code) {
  const float c = static_cast<float>(static_cast<int>(code));
  return {kVersion, Kind::kObs, 0, {matrix(1, 1, std::span<const float>(&c, 1))}};
}

std::optional<ErrorCode> error_of(const BridgeMessage& m) {
  if (m.kind != Kind::kObs || m.n != 0 || m.arrays.size() != 1 || m.arrays[0].data.size() != 1)
    return std::nullopt;
  return static_cast<ErrorCode>(static_cast<int>(m.arrays[0].data[0]));
}

Server::Server(SportConfig cfg, int workers) : cfg_(std::move(cfg)), workers_(workers) {
  cfg_.validate();
}

BridgeMessage Server::observation(bool with_spec) const {
  const auto& b = *batch_;
  const auto N = static_cast<std::uint32_t>(b.size());
  const auto A = static_cast<std::uint32_t>(b.agents());
  BridgeMessage m{kVersion, Kind::kObs, N, {}};
  m.arrays.push_back(matrix(N * A, static_cast<std::uint32_t>(b.obs_dim()), b.observations()));
  m.arrays.push_back(matrix(N, A, b.rewards()));
  std::vector<float> dones(b.dones().begin(), b.dones().end());
  m.arrays.push_back(matrix(N, 1, dones));
  if (with_spec) {
    const float spec[4] = {static_cast<float>(b.obs_dim()), static_cast<float>(b.action_dim()),
                           static_cast<float>(A), static_cast<float>(kVersion)};
    m.arrays.push_back(matrix(1, 4, spec));
  }
  return m;
}

BridgeMessage Server::handle(const BridgeMessage& req) {
  try {
    if (closed_) throw Error(ErrorCode::kInvalidState, "session closed");
    if (req.version != kVersion) throw Error(ErrorCode::kIncompatible, "unsupported protocol version");
    switch (req.kind) {
      case Kind::kReset: {
        if (req.n < 1) protocol_error("reset needs N >= 1");
        if (req.arrays.size() != 1) protocol_error("reset carries exactly one array");
        const std::uint64_t seed = seed_from(req.arrays[0]);
        if (!batch_ || batch_->size() != static_cast<int>(req.n))
          batch_ = std::make_unique<envs::BatchEnv>(cfg_, static_cast<int>(req.n), workers_);
        batch_->reset(seed, 0);
        return observation(true);
      }
      case Kind::kStep: {
        if (!batch_) throw Error(ErrorCode::kInvalidState, "step before reset");
        if (req.n != static_cast<std::uint32_t>(batch_->size())) protocol_error("batch size mismatch");
        if (req.arrays.size() != 1) protocol_error("step carries exactly one array");
        const Array& a = req.arrays[0];
        if (a.rows != req.n * static_cast<std::uint32_t>(batch_->agents()) ||
            a.cols != static_cast<std::uint32_t>(batch_->action_dim()))
          protocol_error("action shape mismatch");
        batch_->step(a.data);
        return observation(false);
      }
      case Kind::kClose:
        closed_ = true;
        return close_request();
      case Kind::kObs:
        protocol_error("obs frames are replies only");
    }
    protocol_error("unknown frame kind");
  } catch (const Error& e) {
    return error_reply(e.code());
  }
}

void write_frame(int fd, const BridgeMessage& m) {
  const auto bytes = encode(m);
  if (!send_all(fd, bytes.data(), bytes.size()))
    throw Error(ErrorCode::kConnection, std::string("send: ") + std::strerror(errno));
}

std::optional<BridgeMessage> read_frame(int fd) {
  std::vector<std::uint8_t> buf(kHeaderBytes);
  const std::size_t got = recv_all(fd, buf.data(), kHeaderBytes);
  if (got == 0) return std::nullopt;
  if (got < kHeaderBytes) throw Error(ErrorCode::kConnection, "connection closed mid-frame");
  Reader r{buf};
  BridgeMessage probe;
  const std::uint32_t len = parse_header(r, &probe);
  buf.resize(kHeaderBytes + len);
  if (recv_all(fd, buf.data() + kHeaderBytes, len) < len)
    throw Error(ErrorCode::kConnection, "connection closed mid-frame");
  return decode(buf);
}

void serve(const SportConfig& cfg, int port, int workers, int sessions,
           const std::function<void(int)>& on_listen) {
  const int lfd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (lfd < 0) throw Error(ErrorCode::kConnection, std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(lfd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(lfd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(lfd, 4) < 0) {
    const std::string what = std::strerror(errno);
    ::close(lfd);
    throw Error(ErrorCode::kConnection, "bind/listen: " + what);
  }
  socklen_t alen = sizeof addr;
  ::getsockname(lfd, reinterpret_cast<sockaddr*>(&addr), &alen);
  if (on_listen) on_listen(ntohs(addr.sin_port));

  for (int served = 0; sessions == 0 || served < sessions; ++served) {
    const int fd = ::accept(lfd, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      ::close(lfd);
      throw Error(ErrorCode::kConnection, std::string("accept: ") + std::strerror(errno));
    }
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    Server server(cfg, workers);
    try {
      while (!server.closed()) {
        std::optional<BridgeMessage> req;
        try {
          req = read_frame(fd);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kProtocol) throw;
          // The stream cannot be resynchronised after a bad header.
          write_frame(fd, error_reply(e.code()));
          break;
        }
        if (!req) break;
        write_frame(fd, server.handle(*req));
      }
    } catch (const Error&) {
      // Client went away; move on to the next session.
    }
    ::close(fd);
  }
  ::close(lfd);
}

Connection Connection::open(const std::string& host, int port, int backoff_ms) {
  std::string last;
  for (int attempt = 0; attempt < 3; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms << (attempt - 1)));
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
      last = gai_strerror(rc);
      continue;
    }
    const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd >= 0 && ::connect(fd, res->ai_addr, res->ai_addrlen) == 0) {
      ::freeaddrinfo(res);
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return Connection(fd);
    }
    last = std::strerror(errno);
    if (fd >= 0) ::close(fd);
    ::freeaddrinfo(res);
  }
  throw Error(ErrorCode::kConnection,
              "cannot reach " + host + ":" + std::to_string(port) + " after 3 attempts: " + last);
}

Connection::Connection(Connection&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }

Connection& Connection::operator=(Connection&& o) noexcept {
  if (this != &o) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = o.fd_;
    o.fd_ = -1;
  }
  return *this;
}

Connection::~Connection() {
  if (fd_ >= 0) ::close(fd_);
}

void Connection::send(const BridgeMessage& m) { write_frame(fd_, m); }

BridgeMessage Connection::receive() {
  auto m = read_frame(fd_);
  if (!m) throw Error(ErrorCode::kConnection, "peer closed the connection");
  return std::move(*m);
}

std::optional<Endpoint> parse_endpoint(const std::string& text) {
  std::string rest = text;
  if (rest.rfind("tcp://", 0) == 0) rest = rest.substr(6);
  const auto colon = rest.rfind(':');
  if (colon == std::string::npos || colon == 0) return std::nullopt;
  Endpoint e;
  e.host = rest.substr(0, colon);
  try {
    std::size_t used = 0;
    e.port = std::stoi(rest.substr(colon + 1), &used);
    if (used != rest.size() - colon - 1 || e.port < 1 || e.port > 65535) return std::nullopt;
  } catch (const std::exception&) {
    return std::nullopt;
  }
  return e;
}

namespace {

class RemotePolicy final : public policies::Policy {
 public:
  explicit RemotePolicy(Connection conn) : conn_(std::move(conn)) {}
  ~RemotePolicy() override {
    try {
      conn_.send(close_request());
    } catch (const Error&) {
    }
  }

  std::string_view name() const override { return "remote"; }

  void act(const envs::Env& env, std::uint64_t trial, float* out) const override {
    const auto A = static_cast<std::uint32_t>(env.agents());
    obs_.resize(static_cast<std::size_t>(A) * env.obs_dim());
    env.observe(obs_.data());
    BridgeMessage req{kVersion, Kind::kObs, 1, {}};
    req.arrays.push_back(matrix(A, static_cast<std::uint32_t>(env.obs_dim()), obs_));
    req.arrays.push_back(seed_array(trial));
    const BridgeMessage reply = conn_.request(req);
    if (reply.kind != Kind::kStep || reply.arrays.size() != 1 || reply.arrays[0].rows != A ||
        reply.arrays[0].cols != static_cast<std::uint32_t>(env.action_dim()))
      protocol_error("remote policy replied with an unexpected frame");
    std::memcpy(out, reply.arrays[0].data.data(), reply.arrays[0].data.size() * sizeof(float));
  }

 private:
  mutable Connection conn_;
  mutable std::vector<float> obs_;
};

}  // namespace

std::unique_ptr<policies::Policy> make_remote_policy(const Endpoint& endpoint, int backoff_ms) {
  return std::make_unique<RemotePolicy>(Connection::open(endpoint.host, endpoint.port, backoff_ms));
}

std::vector<std::uint8_t> conformance_stream() {
  const SportConfig cfg = default_config("penalty_kick");
  Server server(cfg);
  const envs::Env probe(cfg);
  const auto act = static_cast<std::uint32_t>(probe.action_dim());
  const std::uint32_t rows = 2 * static_cast<std::uint32_t>(probe.agents());
  const std::vector<float> zeros(static_cast<std::size_t>(rows) * act, 0.0f);
  const std::vector<float> quarter(zeros.size(), 0.25f);
  const std::vector<float> wrong(static_cast<std::size_t>(3 * probe.agents()) * act, 0.0f);
  const BridgeMessage requests[] = {
      reset_request(2, 7),
      step_request(2, rows, act, zeros),
      step_request(2, rows, act, quarter),
      step_request(3, 3 * static_cast<std::uint32_t>(probe.agents()), act, wrong),
      close_request(),
  };
  std::vector<std::uint8_t> out;
  for (const auto& req : requests) {
    const auto a = encode(req);
    const auto b = encode(server.handle(req));
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

}  // namespace sportsim::bridge
