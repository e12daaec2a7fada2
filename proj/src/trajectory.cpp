#include "sportsim/trajectory.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "sportsim/config.hpp"
#include "sportsim/error.hpp"

namespace sportsim::trajectory {

static_assert(std::endian::native == std::endian::little, "log codec assumes a little-endian host");

std::string_view engine_version() { return "sportsim-0.1.0"; }

namespace {

class Out {
 public:
  explicit Out(std::vector<std::uint8_t>* buf) : buf_(buf) {}
  template <typename T>
  void put(T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    buf_->insert(buf_->end(), p, p + sizeof(T));
  }
  void str(std::string_view s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    buf_->insert(buf_->end(), s.begin(), s.end());
  }
  void floats(const std::vector<float>& v) {
    put<std::uint32_t>(static_cast<std::uint32_t>(v.size()));
    const auto* p = reinterpret_cast<const std::uint8_t*>(v.data());
    buf_->insert(buf_->end(), p, p + v.size() * sizeof(float));
  }

 private:
  std::vector<std::uint8_t>* buf_;
};

class In {
 public:
  In(const std::uint8_t* data, std::size_t size) : p_(data), end_(data + size) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, p_, sizeof(T));
    p_ += sizeof(T);
    return v;
  }
  std::string str() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(p_), n);
    p_ += n;
    return s;
  }
  std::vector<float> floats() {
    const auto n = get<std::uint32_t>();
    need(static_cast<std::size_t>(n) * sizeof(float));
    std::vector<float> v(n);
    std::memcpy(v.data(), p_, n * sizeof(float));
    p_ += n * sizeof(float);
    return v;
  }
  const std::uint8_t* pos() const { return p_; }
  std::size_t left() const { return static_cast<std::size_t>(end_ - p_); }

 private:
  void need(std::size_t n) const {
    if (left() < n) throw Error(ErrorCode::kIntegrity, "trajectory log truncated");
  }
  const std::uint8_t* p_;
  const std::uint8_t* end_;
};

bool same_floats(const std::vector<float>& a, const std::vector<float>& b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0);
}

std::vector<std::uint8_t> encode_header(const LogHeader& h) {
  std::vector<std::uint8_t> body;
  Out o(&body);
  o.str(h.engine_version);
  o.str(h.env);
  o.str(h.policy);
  o.put(h.config_hash);
  o.put(h.seed);
  o.put(h.agents);
  o.put(h.obs_dim);
  o.put(h.action_dim);
  o.str(h.config_json);
  o.str(h.skeleton_json);

  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  Out w(&out);
  w.put(h.format_version);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(body.size()));
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

StepRecord decode_record(In& in) {
  StepRecord r;
  r.kind = static_cast<RecordKind>(in.get<std::uint8_t>());
  if (r.kind != RecordKind::kReset && r.kind != RecordKind::kStep)
    throw Error(ErrorCode::kIntegrity, "unknown record kind");
  r.trial = in.get<std::uint64_t>();
  r.step = in.get<std::uint32_t>();
  r.obs = in.floats();
  r.actions = in.floats();
  const auto agents = in.get<std::uint8_t>();
  r.rewards.resize(agents);
  for (auto& rw : r.rewards) {
    rw.values = in.floats();
    rw.weights = in.floats();
    rw.total = in.get<float>();
  }
  r.done = in.get<std::uint8_t>();
  r.reason = in.get<std::uint8_t>();
  for (auto& s : r.score) s = in.get<std::int32_t>();
  for (auto& h : r.hits) h = in.get<std::int32_t>();
  return r;
}

}  // namespace

bool same_bits(const StepRecord& a, const StepRecord& b) {
  if (a.kind != b.kind || a.trial != b.trial || a.step != b.step || a.done != b.done ||
      a.reason != b.reason || a.score[0] != b.score[0] || a.score[1] != b.score[1] ||
      a.hits[0] != b.hits[0] || a.hits[1] != b.hits[1])
    return false;
  if (!same_floats(a.obs, b.obs) || !same_floats(a.actions, b.actions)) return false;
  if (a.rewards.size() != b.rewards.size()) return false;
  for (std::size_t i = 0; i < a.rewards.size(); ++i) {
    const auto& x = a.rewards[i];
    const auto& y = b.rewards[i];
    if (!same_floats(x.values, y.values) || !same_floats(x.weights, y.weights) ||
        std::bit_cast<std::uint32_t>(x.total) != std::bit_cast<std::uint32_t>(y.total))
      return false;
  }
  return true;
}

std::vector<std::uint8_t> encode_record(const StepRecord& r) {
  std::vector<std::uint8_t> body;
  Out o(&body);
  o.put(static_cast<std::uint8_t>(r.kind));
  o.put(r.trial);
  o.put(r.step);
  o.floats(r.obs);
  o.floats(r.actions);
  o.put(static_cast<std::uint8_t>(r.rewards.size()));
  for (const auto& rw : r.rewards) {
    o.floats(rw.values);
    o.floats(rw.weights);
    o.put(rw.total);
  }
  o.put(r.done);
  o.put(r.reason);
  for (auto s : r.score) o.put(s);
  for (auto h : r.hits) o.put(h);

  std::vector<std::uint8_t> out;
  Out w(&out);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(body.size()));
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

void TrajectoryWriter::add(const StepRecord& r) {
  const auto enc = encode_record(r);
  auto& buf = trials_[r.trial];
  buf.insert(buf.end(), enc.begin(), enc.end());
  ++count_;
}

std::vector<std::uint8_t> TrajectoryWriter::bytes() const {
  std::vector<std::uint8_t> out = encode_header(header_);
  for (const auto& [trial, buf] : trials_) out.insert(out.end(), buf.begin(), buf.end());
  const std::uint64_t hash = fnv1a(out.data(), out.size());
  out.insert(out.end(), kTrailerMagic, kTrailerMagic + 4);
  Out w(&out);
  w.put<std::uint64_t>(count_);
  w.put(hash);
  return out;
}

void TrajectoryWriter::write(const std::string& path) const {
  const auto data = bytes();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path);
  f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  std::ofstream s(path + ".schema.txt");
  s << schema_text();
}

TrajectoryLog parse_log(const std::vector<std::uint8_t>& bytes) {
  constexpr std::size_t kTrailer = 4 + 8 + 8;
  if (bytes.size() < 4 + 2 + 4 + kTrailer || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw Error(ErrorCode::kIntegrity, "not a trajectory log");
  const std::size_t body_end = bytes.size() - kTrailer;
  In trailer(bytes.data() + body_end, kTrailer);
  char magic[4];
  for (char& c : magic) c = static_cast<char>(trailer.get<std::uint8_t>());
  if (std::memcmp(magic, kTrailerMagic, 4) != 0)
    throw Error(ErrorCode::kIntegrity, "trajectory log trailer missing");
  const auto count = trailer.get<std::uint64_t>();
  const auto hash = trailer.get<std::uint64_t>();
  if (fnv1a(bytes.data(), body_end) != hash)
    throw Error(ErrorCode::kIntegrity, "trajectory log hash mismatch");

  In in(bytes.data() + 4, body_end - 4);
  TrajectoryLog log;
  LogHeader& h = log.header;
  h.format_version = in.get<std::uint16_t>();
  if (h.format_version != kFormatVersion)
    throw Error(ErrorCode::kIncompatible,
                "log format version " + std::to_string(h.format_version) + " is not supported");
  const auto header_len = in.get<std::uint32_t>();
  if (in.left() < header_len) throw Error(ErrorCode::kIntegrity, "trajectory header truncated");
  In hin(in.pos(), header_len);
  h.engine_version = hin.str();
  if (h.engine_version != engine_version())
    throw Error(ErrorCode::kIncompatible, "log written by " + h.engine_version + ", this is " +
                                              std::string(engine_version()));
  h.env = hin.str();
  h.policy = hin.str();
  h.config_hash = hin.get<std::uint64_t>();
  h.seed = hin.get<std::uint64_t>();
  h.agents = hin.get<std::uint32_t>();
  h.obs_dim = hin.get<std::uint32_t>();
  h.action_dim = hin.get<std::uint32_t>();
  h.config_json = hin.str();
  h.skeleton_json = hin.str();

  In rec(in.pos() + header_len, in.left() - header_len);
  while (rec.left() > 0) {
    const auto len = rec.get<std::uint32_t>();
    if (rec.left() < len) throw Error(ErrorCode::kIntegrity, "trajectory record truncated");
    In body(rec.pos(), len);
    log.records.push_back(decode_record(body));
    if (body.left() != 0) throw Error(ErrorCode::kIntegrity, "trajectory record length mismatch");
    for (std::uint32_t i = 0; i < len; ++i) rec.get<std::uint8_t>();
  }
  if (log.records.size() != count)
    throw Error(ErrorCode::kIntegrity, "trajectory record count mismatch");
  return log;
}

TrajectoryLog read_log(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_log(bytes);
}

std::string schema_text() {
  return R"(sportsim trajectory log, format version 1
All integers little-endian; floats IEEE-754 binary32; str = u32 length + bytes;
f32[] = u32 count + count * f32.

file    := magic "SPTL" | u16 format_version | u32 header_len | header | record* | trailer
header  := str engine_version | str env | str policy | u64 config_hash | u64 seed
           | u32 agents | u32 obs_dim | u32 action_dim | str config_json | str skeleton_json
record  := u32 body_len | body
body    := u8 kind (0 reset, 1 step) | u64 trial | u32 step | f32[] obs | f32[] actions
           | u8 agents | agents * (f32[] term_values | f32[] term_weights | f32 total)
           | u8 done | u8 termination_reason | i32 score[2] | i32 hits[2]
trailer := magic "SPTE" | u64 record_count | u64 fnv1a64(all bytes before the trailer)

Records are grouped by trial in ascending trial order. Trial k was reset with
seed derive_seed(seed, k). A reset record carries the initial observation; each
step record carries the actions applied and the state after the step.
)";
}

}  // namespace sportsim::trajectory
