#pragma once

// Evaluation accumulators. Sums are kept as integer multiples of a fixed
// quantum so merging is exact: any split of a trial stream merges to the
// same totals as a single pass, in any order.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sportsim/config.hpp"
#include "sportsim/envs.hpp"

namespace sportsim::metrics {

// Reference world records.
struct RecordBook {
  static constexpr double kLongJump = 8.95;    // m
  static constexpr double kHighJump = 2.45;    // m
  static constexpr double kHurdling = 12.8;    // s
  static constexpr double kJavelin = 104.8;    // m
};

inline constexpr double kQuantum = 1e-9;

// Exact sum of values quantized to kQuantum, with a count of contributions.
struct QuantizedSum {
  std::int64_t units = 0;
  std::int64_t count = 0;

  void add(double v);
  void merge(const QuantizedSum& o) {
    units += o.units;
    count += o.count;
  }
  std::optional<double> mean() const;
  bool operator==(const QuantizedSum&) const = default;
};

class MetricsAccumulator {
 public:
  explicit MetricsAccumulator(Sport sport) : sport_(sport) {}

  Sport sport() const { return sport_; }
  std::int64_t trials() const { return trials_; }

  // Throws kConfiguration when the summary belongs to another sport or the
  // episode has not terminated.
  void record(const envs::EpisodeSummary& s);
  // Throws kConfiguration on a sport mismatch.
  void merge(const MetricsAccumulator& other);

  // Undefined (nullopt) when no trial defined the metric.
  std::optional<double> success_rate() const;  // percent
  std::optional<double> avg_distance() const;  // m
  std::optional<double> avg_hits() const;
  std::optional<double> error_distance() const;  // m
  std::optional<double> hit_rate() const;        // percent
  std::optional<double> time() const;            // s, successful trials only

  std::int64_t successes() const { return successes_; }
  const QuantizedSum& distance() const { return distance_; }
  const QuantizedSum& hits() const { return hits_; }
  const QuantizedSum& error() const { return error_; }
  const QuantizedSum& elapsed() const { return time_; }
  std::int64_t contacts() const { return contacts_; }
  std::int64_t contact_trials() const { return contact_trials_; }

  bool operator==(const MetricsAccumulator&) const = default;

 private:
  Sport sport_;
  std::int64_t trials_ = 0;
  std::int64_t successes_ = 0;
  QuantizedSum distance_;
  QuantizedSum hits_;
  QuantizedSum error_;
  QuantizedSum time_;
  std::int64_t contacts_ = 0;
  std::int64_t contact_trials_ = 0;
};

struct MetricCell {
  std::string name;    // e.g. "Suc Rate (1m)"
  std::string unit;    // "%", "m", "s" or ""
  std::optional<double> value;
  std::int64_t defined = 0;  // trials that contributed
};

struct MetricTable {
  std::string env;
  Sport sport;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::string policy;
  std::vector<MetricCell> cells;
};

inline constexpr int kSchemaVersion = 1;

// Columns per sport, in report order. `level` labels the high-jump columns
// ("1m").
MetricTable report(const MetricsAccumulator& acc, const SportConfig& cfg, double level);

// Percentages with one decimal ("76.6%"), other values with two; "-" for
// undefined.
std::string format_value(const MetricCell& c);
std::string to_csv(const MetricTable& t);
std::string to_text(const MetricTable& t);

}  // namespace sportsim::metrics
