// Copyright 2026 The launchsim Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Launch records, per-run reports and cross-policy comparison tables.

#ifndef LAUNCHSIM_METRICS_H_
#define LAUNCHSIM_METRICS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "launchsim/units.h"

namespace launchsim {

enum class LaunchKind { kCold, kWarm, kHot };

const char* LaunchKindName(LaunchKind kind);

struct LaunchRecord {
  std::string app_id;
  LaunchKind kind = LaunchKind::kCold;
  Micros start_us = 0;
  Micros t_io_us = 0;
  Micros t_cpu_us = 0;
  Micros t_alloc_us = 0;
  Micros total_us = 0;
  bool under_1s = false;
  bool relaunch = false;  // the app had been launched before
  bool failed = false;

  double t_io_ms() const { return MicrosToMillis(t_io_us); }
  double t_cpu_ms() const { return MicrosToMillis(t_cpu_us); }
  double t_alloc_ms() const { return MicrosToMillis(t_alloc_us); }
  double total_ms() const { return MicrosToMillis(total_us); }
};

// Nearest-rank percentile, p in (0, 100]. Zero for an empty sample.
double NearestRank(std::vector<double> values, double p);

struct LaunchSummary {
  std::int64_t launches = 0;
  std::int64_t cold_launches = 0;
  std::int64_t cold_relaunch_count = 0;
  std::int64_t hot_relaunch_count = 0;
  std::int64_t warm_launch_count = 0;
  std::int64_t failed_launches = 0;
  double mean_cold_ms = 0.0;
  double p50_cold_ms = 0.0;
  double p95_cold_ms = 0.0;
  double pct_under_1s = 0.0;  // over all launches, failed ones count as slow
};

// Cold-latency statistics skip failed launches.
LaunchSummary MetricsFromRecords(std::span<const LaunchRecord> records);

struct MetricsReport {
  std::string scenario;
  std::string policy;
  std::uint64_t seed = 0;
  std::vector<LaunchRecord> records;
  LaunchSummary summary;

  std::int64_t direct_reclaim_count = 0;
  std::int64_t kill_count = 0;
  Bytes killed_bytes = 0;
  Bytes kill_net_freed = 0;  // sum of footprint minus relaunch footprint
  Bytes peak_preloaded = 0;
  Bytes peak_swap_used = 0;
  std::int64_t throughput_bucket_ms = 100;
  std::vector<double> io_throughput;  // bytes/s per bucket

  std::int64_t reclaim_calls = 0;
  std::int64_t efficiency_first_calls = 0;
  std::int64_t rebalancing_calls = 0;
  std::int64_t default_calls = 0;
  Bytes efficiency_first_io_write = 0;
  Bytes efficiency_first_anon_freed = 0;
  Bytes reclaimed_file = 0;
  Bytes reclaimed_anon = 0;
  Bytes preload_evicted = 0;
  Bytes protected_evicted = 0;
  std::int64_t protected_skips = 0;
  std::int64_t scan_count = 0;
  double scan_cpu_ms = 0.0;
  Micros end_time_us = 0;
};

// Values are rounded to three decimals so that the JSON text is stable.
nlohmann::json ReportToJson(const MetricsReport& report,
                            bool include_records = true);
std::string ReportToString(const MetricsReport& report);

// Metrics compared across policies, relative to a reference row.
struct ComparisonRow {
  std::string policy;
  double mean_cold_ms = 0.0;
  double p50_cold_ms = 0.0;
  double p95_cold_ms = 0.0;
  double pct_under_1s = 0.0;
  std::int64_t cold_relaunch_count = 0;
  std::int64_t hot_relaunch_count = 0;
  std::int64_t direct_reclaim_count = 0;
  std::int64_t kill_count = 0;
  double peak_preloaded_mib = 0.0;
  // Percent change against the reference; 0 when both are 0, empty when
  // only the reference is.
  std::optional<double> mean_cold_delta_pct;
  std::optional<double> cold_relaunch_delta_pct;
  std::optional<double> direct_reclaim_delta_pct;
  std::optional<double> kill_delta_pct;

  bool operator==(const ComparisonRow&) const = default;
};

struct Comparison {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string reference;
  std::vector<ComparisonRow> rows;

  bool operator==(const Comparison&) const = default;
};

// Reference is the "baseline" report when present, else the first.
Comparison Compare(std::span<const MetricsReport> reports);

nlohmann::json ComparisonToJson(const Comparison& c);
Comparison ComparisonFromJson(const nlohmann::json& j);
std::string ComparisonToCsv(const Comparison& c);
// Throws ParseError on malformed input.
Comparison ComparisonFromCsv(std::string_view csv);
std::string ComparisonToText(const Comparison& c);

double RoundMillis(double v);  // to three decimals

}  // namespace launchsim

#endif  // LAUNCHSIM_METRICS_H_
