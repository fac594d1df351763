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

#include "launchsim/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "launchsim/error.h"

namespace launchsim {

using nlohmann::json;

const char* LaunchKindName(LaunchKind kind) {
  switch (kind) {
    case LaunchKind::kCold:
      return "cold";
    case LaunchKind::kWarm:
      return "warm";
    case LaunchKind::kHot:
      return "hot";
  }
  return "?";
}

double RoundMillis(double v) {
  const double r = std::round(v * 1000.0) / 1000.0;
  return r == 0.0 ? 0.0 : r;  // no negative zero
}

double NearestRank(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

LaunchSummary MetricsFromRecords(std::span<const LaunchRecord> records) {
  LaunchSummary s;
  std::vector<double> cold;
  std::int64_t under = 0;
  for (const auto& r : records) {
    ++s.launches;
    if (r.failed) ++s.failed_launches;
    if (r.under_1s && !r.failed) ++under;
    switch (r.kind) {
      case LaunchKind::kCold:
        ++s.cold_launches;
        if (r.relaunch) ++s.cold_relaunch_count;
        if (!r.failed) cold.push_back(r.total_ms());
        break;
      case LaunchKind::kWarm:
        ++s.warm_launch_count;
        break;
      case LaunchKind::kHot:
        ++s.hot_relaunch_count;
        break;
    }
  }
  if (!cold.empty()) {
    double sum = 0.0;
    for (double v : cold) sum += v;
    s.mean_cold_ms = sum / static_cast<double>(cold.size());
    s.p50_cold_ms = NearestRank(cold, 50.0);
    s.p95_cold_ms = NearestRank(cold, 95.0);
  }
  if (s.launches > 0) {
    s.pct_under_1s =
        100.0 * static_cast<double>(under) / static_cast<double>(s.launches);
  }
  return s;
}

json ReportToJson(const MetricsReport& r, bool include_records) {
  const LaunchSummary& s = r.summary;
  json j;
  j["scenario"] = r.scenario;
  j["policy"] = r.policy;
  j["seed"] = r.seed;
  j["summary"] = {
      {"launches", s.launches},
      {"cold_launches", s.cold_launches},
      {"cold_relaunch_count", s.cold_relaunch_count},
      {"hot_relaunch_count", s.hot_relaunch_count},
      {"warm_launch_count", s.warm_launch_count},
      {"failed_launches", s.failed_launches},
      {"mean_cold_ms", RoundMillis(s.mean_cold_ms)},
      {"p50_cold_ms", RoundMillis(s.p50_cold_ms)},
      {"p95_cold_ms", RoundMillis(s.p95_cold_ms)},
      {"pct_under_1s", RoundMillis(s.pct_under_1s)},
  };
  j["direct_reclaim_count"] = r.direct_reclaim_count;
  j["kill_count"] = r.kill_count;
  j["killed_bytes"] = r.killed_bytes;
  j["kill_net_freed"] = r.kill_net_freed;
  j["peak_preloaded"] = r.peak_preloaded;
  j["peak_swap_used"] = r.peak_swap_used;
  j["reclaim"] = {
      {"calls", r.reclaim_calls},
      {"efficiency_first_calls", r.efficiency_first_calls},
      {"rebalancing_calls", r.rebalancing_calls},
      {"default_calls", r.default_calls},
      {"efficiency_first_io_write", r.efficiency_first_io_write},
      {"efficiency_first_anon_freed", r.efficiency_first_anon_freed},
      {"file_freed", r.reclaimed_file},
      {"anon_freed", r.reclaimed_anon},
      {"preload_evicted", r.preload_evicted},
      {"protected_evicted", r.protected_evicted},
      {"protected_skips", r.protected_skips},
  };
  j["scan_count"] = r.scan_count;
  j["scan_cpu_ms"] = RoundMillis(r.scan_cpu_ms);
  j["end_time_ms"] = RoundMillis(MicrosToMillis(r.end_time_us));
  j["throughput_bucket_ms"] = r.throughput_bucket_ms;
  json tp = json::array();
  for (double v : r.io_throughput) tp.push_back(std::round(v));
  j["io_throughput"] = std::move(tp);
  if (include_records) {
    json recs = json::array();
    for (const auto& x : r.records) {
      recs.push_back({{"app", x.app_id},
                      {"kind", LaunchKindName(x.kind)},
                      {"start_ms", RoundMillis(MicrosToMillis(x.start_us))},
                      {"total_ms", RoundMillis(x.total_ms())},
                      {"t_io_ms", RoundMillis(x.t_io_ms())},
                      {"t_cpu_ms", RoundMillis(x.t_cpu_ms())},
                      {"t_alloc_ms", RoundMillis(x.t_alloc_ms())},
                      {"under_1s", x.under_1s},
                      {"relaunch", x.relaunch},
                      {"failed", x.failed}});
    }
    j["launches"] = std::move(recs);
  }
  return j;
}

std::string ReportToString(const MetricsReport& report) {
  return ReportToJson(report).dump(2);
}

namespace {

std::optional<double> DeltaPct(double value, double reference) {
  if (reference == 0.0) {
    return value == 0.0 ? std::optional<double>(0.0) : std::nullopt;
  }
  return RoundMillis(100.0 * (value - reference) / reference);
}

// Column order shared by the CSV writer and reader.
constexpr const char* kCsvColumns[] = {
    "policy",
    "mean_cold_ms",
    "p50_cold_ms",
    "p95_cold_ms",
    "pct_under_1s",
    "cold_relaunch_count",
    "hot_relaunch_count",
    "direct_reclaim_count",
    "kill_count",
    "peak_preloaded_mib",
    "mean_cold_delta_pct",
    "cold_relaunch_delta_pct",
    "direct_reclaim_delta_pct",
    "kill_delta_pct",
};
constexpr std::size_t kCsvWidth = std::size(kCsvColumns);

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", RoundMillis(v));
  return buf;
}

std::string OptNum(const std::optional<double>& v) {
  return v ? Num(*v) : std::string();
}

json OptJson(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> OptFromJson(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  out.push_back(cell);
  return out;
}

double ParseDouble(const std::string& s, int line, const char* field) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, field, "not a number: '" + s + "'");
  }
}

std::int64_t ParseInt(const std::string& s, int line, const char* field) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, field, "not an integer: '" + s + "'");
  }
}

}  // namespace

Comparison Compare(std::span<const MetricsReport> reports) {
  Comparison c;
  if (reports.empty()) return c;
  const MetricsReport* ref = &reports.front();
  for (const auto& r : reports) {
    if (r.policy == "baseline") {
      ref = &r;
      break;
    }
  }
  c.scenario = ref->scenario;
  c.seed = ref->seed;
  c.reference = ref->policy;
  const auto as_d = [](std::int64_t v) { return static_cast<double>(v); };
  for (const auto& r : reports) {
    ComparisonRow row;
    row.policy = r.policy;
    row.mean_cold_ms = RoundMillis(r.summary.mean_cold_ms);
    row.p50_cold_ms = RoundMillis(r.summary.p50_cold_ms);
    row.p95_cold_ms = RoundMillis(r.summary.p95_cold_ms);
    row.pct_under_1s = RoundMillis(r.summary.pct_under_1s);
    row.cold_relaunch_count = r.summary.cold_relaunch_count;
    row.hot_relaunch_count = r.summary.hot_relaunch_count;
    row.direct_reclaim_count = r.direct_reclaim_count;
    row.kill_count = r.kill_count;
    row.peak_preloaded_mib =
        RoundMillis(static_cast<double>(r.peak_preloaded) / static_cast<double>(kMiB));
    row.mean_cold_delta_pct =
        DeltaPct(r.summary.mean_cold_ms, ref->summary.mean_cold_ms);
    row.cold_relaunch_delta_pct = DeltaPct(as_d(r.summary.cold_relaunch_count),
                                           as_d(ref->summary.cold_relaunch_count));
    row.direct_reclaim_delta_pct = DeltaPct(as_d(r.direct_reclaim_count),
                                            as_d(ref->direct_reclaim_count));
    row.kill_delta_pct = DeltaPct(as_d(r.kill_count), as_d(ref->kill_count));
    c.rows.push_back(std::move(row));
  }
  return c;
}

json ComparisonToJson(const Comparison& c) {
  json rows = json::array();
  for (const auto& r : c.rows) {
    rows.push_back({{"policy", r.policy},
                    {"mean_cold_ms", r.mean_cold_ms},
                    {"p50_cold_ms", r.p50_cold_ms},
                    {"p95_cold_ms", r.p95_cold_ms},
                    {"pct_under_1s", r.pct_under_1s},
                    {"cold_relaunch_count", r.cold_relaunch_count},
                    {"hot_relaunch_count", r.hot_relaunch_count},
                    {"direct_reclaim_count", r.direct_reclaim_count},
                    {"kill_count", r.kill_count},
                    {"peak_preloaded_mib", r.peak_preloaded_mib},
                    {"mean_cold_delta_pct", OptJson(r.mean_cold_delta_pct)},
                    {"cold_relaunch_delta_pct", OptJson(r.cold_relaunch_delta_pct)},
                    {"direct_reclaim_delta_pct", OptJson(r.direct_reclaim_delta_pct)},
                    {"kill_delta_pct", OptJson(r.kill_delta_pct)}});
  }
  return {{"scenario", c.scenario},
          {"seed", c.seed},
          {"reference", c.reference},
          {"rows", rows}};
}

Comparison ComparisonFromJson(const json& j) {
  Comparison c;
  try {
    c.scenario = j.at("scenario").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.reference = j.at("reference").get<std::string>();
    for (const auto& r : j.at("rows")) {
      ComparisonRow row;
      row.policy = r.at("policy").get<std::string>();
      row.mean_cold_ms = r.at("mean_cold_ms").get<double>();
      row.p50_cold_ms = r.at("p50_cold_ms").get<double>();
      row.p95_cold_ms = r.at("p95_cold_ms").get<double>();
      row.pct_under_1s = r.at("pct_under_1s").get<double>();
      row.cold_relaunch_count = r.at("cold_relaunch_count").get<std::int64_t>();
      row.hot_relaunch_count = r.at("hot_relaunch_count").get<std::int64_t>();
      row.direct_reclaim_count = r.at("direct_reclaim_count").get<std::int64_t>();
      row.kill_count = r.at("kill_count").get<std::int64_t>();
      row.peak_preloaded_mib = r.at("peak_preloaded_mib").get<double>();
      row.mean_cold_delta_pct = OptFromJson(r, "mean_cold_delta_pct");
      row.cold_relaunch_delta_pct = OptFromJson(r, "cold_relaunch_delta_pct");
      row.direct_reclaim_delta_pct = OptFromJson(r, "direct_reclaim_delta_pct");
      row.kill_delta_pct = OptFromJson(r, "kill_delta_pct");
      c.rows.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    throw ParseError(0, "comparison", e.what());
  }
  return c;
}

std::string ComparisonToCsv(const Comparison& c) {
  std::ostringstream out;
  out << "# scenario=" << c.scenario << " seed=" << c.seed
      << " reference=" << c.reference << '\n';
  for (std::size_t i = 0; i < kCsvWidth; ++i) {
    out << (i ? "," : "") << kCsvColumns[i];
  }
  out << '\n';
  for (const auto& r : c.rows) {
    out << r.policy << ',' << Num(r.mean_cold_ms) << ',' << Num(r.p50_cold_ms)
        << ',' << Num(r.p95_cold_ms) << ',' << Num(r.pct_under_1s) << ','
        << r.cold_relaunch_count << ',' << r.hot_relaunch_count << ','
        << r.direct_reclaim_count << ',' << r.kill_count << ','
        << Num(r.peak_preloaded_mib) << ',' << OptNum(r.mean_cold_delta_pct)
        << ',' << OptNum(r.cold_relaunch_delta_pct) << ','
        << OptNum(r.direct_reclaim_delta_pct) << ',' << OptNum(r.kill_delta_pct)
        << '\n';
  }
  return out.str();
}

Comparison ComparisonFromCsv(std::string_view csv) {
  Comparison c;
  std::istringstream in{std::string(csv)};
  std::string line;
  int n = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      std::istringstream meta(line.substr(2));
      std::string kv;
      while (meta >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        if (key == "scenario") c.scenario = value;
        if (key == "reference") c.reference = value;
        if (key == "seed") {
          c.seed = static_cast<std::uint64_t>(ParseInt(value, n, "seed"));
        }
      }
      continue;
    }
    const std::vector<std::string> cells = SplitCsv(line);
    if (cells.size() != kCsvWidth) {
      throw ParseError(n, "row", "expected " + std::to_string(kCsvWidth) +
                                     " columns, got " +
                                     std::to_string(cells.size()));
    }
    if (!header) {
      for (std::size_t i = 0; i < kCsvWidth; ++i) {
        if (cells[i] != kCsvColumns[i]) {
          throw ParseError(n, kCsvColumns[i], "unexpected header '" + cells[i] + "'");
        }
      }
      header = true;
      continue;
    }
    const auto opt = [&](std::size_t i) -> std::optional<double> {
      if (cells[i].empty()) return std::nullopt;
      return ParseDouble(cells[i], n, kCsvColumns[i]);
    };
    ComparisonRow r;
    r.policy = cells[0];
    r.mean_cold_ms = ParseDouble(cells[1], n, kCsvColumns[1]);
    r.p50_cold_ms = ParseDouble(cells[2], n, kCsvColumns[2]);
    r.p95_cold_ms = ParseDouble(cells[3], n, kCsvColumns[3]);
    r.pct_under_1s = ParseDouble(cells[4], n, kCsvColumns[4]);
    r.cold_relaunch_count = ParseInt(cells[5], n, kCsvColumns[5]);
    r.hot_relaunch_count = ParseInt(cells[6], n, kCsvColumns[6]);
    r.direct_reclaim_count = ParseInt(cells[7], n, kCsvColumns[7]);
    r.kill_count = ParseInt(cells[8], n, kCsvColumns[8]);
    r.peak_preloaded_mib = ParseDouble(cells[9], n, kCsvColumns[9]);
    r.mean_cold_delta_pct = opt(10);
    r.cold_relaunch_delta_pct = opt(11);
    r.direct_reclaim_delta_pct = opt(12);
    r.kill_delta_pct = opt(13);
    c.rows.push_back(std::move(r));
  }
  if (!header) throw ParseError(n, "header", "missing header row");
  return c;
}

std::string ComparisonToText(const Comparison& c) {
  std::ostringstream out;
  out << "scenario " << c.scenario << "  seed " << c.seed << "  reference "
      << c.reference << "\n\n";
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-15s %10s %10s %10s %8s %8s %6s %6s %6s %9s %9s\n",
                "policy", "mean_ms", "p50_ms", "p95_ms", "<1s%", "cold_rl",
                "hot", "dr", "kills", "d_mean%", "d_cold%");
  out << buf;
  for (const auto& r : c.rows) {
    std::snprintf(buf, sizeof(buf),
                  "%-15s %10.1f %10.1f %10.1f %8.1f %8lld %6lld %6lld %6lld %9s %9s\n",
                  r.policy.c_str(), r.mean_cold_ms, r.p50_cold_ms, r.p95_cold_ms,
                  r.pct_under_1s, static_cast<long long>(r.cold_relaunch_count),
                  static_cast<long long>(r.hot_relaunch_count),
                  static_cast<long long>(r.direct_reclaim_count),
                  static_cast<long long>(r.kill_count),
                  OptNum(r.mean_cold_delta_pct).c_str(),
                  OptNum(r.cold_relaunch_delta_pct).c_str());
    out << buf;
  }
  return out.str();
}

}  // namespace launchsim
