#include "sportsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace sportsim::metrics {

void QuantizedSum::add(double v) {
  if (!std::isfinite(v)) throw Error(ErrorCode::kDomain, "metric value must be finite");
  units += std::llround(v / kQuantum);
  count += 1;
}

std::optional<double> QuantizedSum::mean() const {
  if (count == 0) return std::nullopt;
  return static_cast<double>(units) * kQuantum / static_cast<double>(count);
}

void MetricsAccumulator::record(const envs::EpisodeSummary& s) {
  if (s.sport != sport_)
    throw Error(ErrorCode::kConfiguration, "summary sport does not match the accumulator");
  if (s.reason == envs::TerminationReason::kNone)
    throw Error(ErrorCode::kConfiguration, "episode has not terminated");
  trials_ += 1;
  if (s.success) {
    successes_ += 1;
    time_.add(s.elapsed);
  }
  if (s.distance) distance_.add(*s.distance);
  if (s.hits) hits_.add(*s.hits);
  if (s.error_distance) error_.add(*s.error_distance);
  if (s.contact) {
    contact_trials_ += 1;
    if (*s.contact) contacts_ += 1;
  }
}

void MetricsAccumulator::merge(const MetricsAccumulator& o) {
  if (o.sport_ != sport_) throw Error(ErrorCode::kConfiguration, "cannot merge different sports");
  trials_ += o.trials_;
  successes_ += o.successes_;
  distance_.merge(o.distance_);
  hits_.merge(o.hits_);
  error_.merge(o.error_);
  time_.merge(o.time_);
  contacts_ += o.contacts_;
  contact_trials_ += o.contact_trials_;
}

std::optional<double> MetricsAccumulator::success_rate() const {
  if (trials_ == 0) return std::nullopt;
  return 100.0 * static_cast<double>(successes_) / static_cast<double>(trials_);
}
std::optional<double> MetricsAccumulator::avg_distance() const { return distance_.mean(); }
std::optional<double> MetricsAccumulator::avg_hits() const { return hits_.mean(); }
std::optional<double> MetricsAccumulator::error_distance() const { return error_.mean(); }
std::optional<double> MetricsAccumulator::hit_rate() const {
  if (contact_trials_ == 0) return std::nullopt;
  return 100.0 * static_cast<double>(contacts_) / static_cast<double>(contact_trials_);
}
std::optional<double> MetricsAccumulator::time() const { return time_.mean(); }

namespace {

std::string level_label(double level) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%gm", level);
  return buf;
}

}  // namespace

MetricTable report(const MetricsAccumulator& acc, const SportConfig& cfg, double level) {
  MetricTable t;
  t.env = cfg.env;
  t.sport = cfg.sport;
  t.trials = acc.trials();
  t.config_hash = cfg.hash();
  const MetricCell suc{"Suc Rate", "%", acc.success_rate(), acc.trials()};
  const MetricCell dis{"Avg Dis", "m", acc.avg_distance(), acc.distance().count};
  const MetricCell hits{"Avg Hits", "", acc.avg_hits(), acc.hits().count};
  const MetricCell err{"Error Dis", "m", acc.error_distance(), acc.error().count};
  const MetricCell hit_rate{"Hit Rate", "%", acc.hit_rate(), acc.contact_trials()};
  const MetricCell time{"Time", "s", acc.time(), acc.elapsed().count};
  switch (cfg.sport) {
    case Sport::kHighJump: {
      const std::string l = " (" + level_label(level) + ")";
      t.cells = {{"Suc Rate" + l, "%", suc.value, suc.defined},
                 {"Height" + l, "m", dis.value, dis.defined}};
      break;
    }
    case Sport::kLongJump:
    case Sport::kJavelin: t.cells = {suc, dis}; break;
    case Sport::kHurdling: t.cells = {suc, dis, time}; break;
    case Sport::kGolf: t.cells = {hit_rate, err}; break;
    case Sport::kTennis:
    case Sport::kTableTennis: t.cells = {hits, err}; break;
    case Sport::kPenaltyKick: t.cells = {suc, err}; break;
    case Sport::kFreeThrow: t.cells = {suc}; break;
    case Sport::kFencing:
    case Sport::kBoxing:
    case Sport::kSoccer: t.cells = {suc, hits}; break;
  }
  return t;
}

std::string format_value(const MetricCell& c) {
  if (!c.value) return "-";
  char buf[64];
  if (c.unit == "%")
    std::snprintf(buf, sizeof buf, "%.1f%%", *c.value);
  else
    std::snprintf(buf, sizeof buf, "%.2f", *c.value);
  return buf;
}

std::string to_csv(const MetricTable& t) {
  std::ostringstream os;
  os << "# schema_version=" << kSchemaVersion << " env=" << t.env << " policy=" << t.policy
     << " seed=" << t.seed << " config_hash=" << std::hex << t.config_hash << std::dec
     << " trials=" << t.trials << "\n";
  os << "metric,unit,value,defined_trials\n";
  for (const auto& c : t.cells) {
    os << c.name << "," << c.unit << ",";
    if (c.value) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.9g", *c.value);
      os << buf;
    }
    os << "," << c.defined << "\n";
  }
  return os.str();
}

std::string to_text(const MetricTable& t) {
  std::vector<std::string> values;
  size_t width = 0;
  for (const auto& c : t.cells) {
    values.push_back(format_value(c));
    width = std::max({width, c.name.size(), values.back().size()});
  }
  std::ostringstream os;
  os << t.env << "  policy=" << t.policy << "  trials=" << t.trials << "  seed=" << t.seed
     << "  config_hash=" << std::hex << t.config_hash << std::dec << "\n";
  auto pad = [&](const std::string& s) { return std::string(width - s.size() + 2, ' ') + s; };
  for (const auto& c : t.cells) os << pad(c.name);
  os << "\n";
  for (const auto& v : values) os << pad(v);
  os << "\n";
  for (const auto& c : t.cells) os << pad("n=" + std::to_string(c.defined));
  os << "\n";
  return os.str();
}

}  // namespace sportsim::metrics
