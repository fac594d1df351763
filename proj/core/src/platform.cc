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

#include "launchsim/platform.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "launchsim/error.h"

namespace launchsim {

namespace {

constexpr double kSmallBlockRate = 96.0 * kMiB;
constexpr double kEndToEndRatio = 22.8;

template <typename T>
void ReadOptional(const nlohmann::json& j, const char* key, T* out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    *out = it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("device config: key '") + key +
                      "': " + e.what());
  }
}

std::vector<BandwidthPoint> CurveFromJson(const nlohmann::json& j) {
  if (!j.is_array()) {
    throw ConfigError("device config: key 'bandwidth_curve': expected array");
  }
  std::vector<BandwidthPoint> curve;
  for (const auto& point : j) {
    BandwidthPoint p;
    if (point.is_array() && point.size() == 2) {
      p.block_size = point[0].get<Bytes>();
      p.bytes_per_sec = point[1].get<double>();
    } else if (point.is_object()) {
      p.block_size = point.at("block_size").get<Bytes>();
      p.bytes_per_sec = point.at("bytes_per_sec").get<double>();
    } else {
      throw ConfigError(
          "device config: key 'bandwidth_curve': each point is "
          "[block_size, bytes_per_sec]");
    }
    curve.push_back(p);
  }
  return curve;
}

void ValidateCurve(const std::vector<BandwidthPoint>& curve) {
  if (curve.empty()) throw ConfigError("bandwidth curve is empty");
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve[i].block_size <= 0 || !(curve[i].bytes_per_sec > 0.0)) {
      throw ConfigError("bandwidth curve point " + std::to_string(i) +
                        " must have positive block size and rate");
    }
    if (i > 0 && curve[i].block_size <= curve[i - 1].block_size) {
      throw ConfigError("bandwidth curve block sizes must increase");
    }
  }
}

}  // namespace

std::vector<BandwidthPoint> DefaultBandwidthCurve() {
  // Exponents are log2(block / 4 KiB); the rate grows geometrically so the
  // 1 MiB point sits at exactly kEndToEndRatio times the 4 KiB point.
  static constexpr int kSteps[] = {0, 2, 4, 5, 6, 7, 8};
  std::vector<BandwidthPoint> curve;
  for (int step : kSteps) {
    const Bytes block = (4 * kKiB) << step;
    const double rate =
        step == 8 ? kSmallBlockRate * kEndToEndRatio
                  : kSmallBlockRate * std::pow(kEndToEndRatio, step / 8.0);
    curve.push_back({block, rate});
  }
  return curve;
}

DeviceConfig DeviceConfig::Default() {
  DeviceConfig config;
  config.bandwidth_curve = DefaultBandwidthCurve();
  config.free_threshold = config.dram_total / 10;
  return config;
}

Bytes DeviceConfig::SwapLimit() const {
  return swap_capacity +
         static_cast<Bytes>(std::floor(zram_fraction *
                                       static_cast<double>(dram_total)));
}

Bytes DeviceConfig::MinWatermark() const {
  return static_cast<Bytes>(tuning.min_watermark_ratio *
                            static_cast<double>(free_threshold));
}

Bytes DeviceConfig::HighWatermark() const {
  return static_cast<Bytes>(tuning.high_watermark_ratio *
                            static_cast<double>(free_threshold));
}

void DeviceConfig::Validate() const {
  if (dram_total <= 0) throw ConfigError("dram_total must be positive");
  if (sys_reserved < 0 || sys_reserved >= dram_total) {
    throw ConfigError("sys_reserved must be in [0, dram_total)");
  }
  if (swap_capacity < 0) throw ConfigError("swap_capacity must be >= 0");
  if (!(zram_fraction >= 0.0 && zram_fraction <= 1.0)) {
    throw ConfigError("zram_fraction must be in [0, 1]");
  }
  ValidateCurve(bandwidth_curve);
  if (reclaim_tick_ms <= 0) throw ConfigError("reclaim_tick must be > 0");
  if (preload_budget < 0) throw ConfigError("preload_budget must be >= 0");
  if (free_threshold <= 0 || free_threshold >= UserMemory()) {
    throw ConfigError("free_threshold must be in (0, dram_total - sys_reserved)");
  }
  if (alloc_threshold < 0) throw ConfigError("alloc_threshold must be >= 0");
  if (!(anon_reclaim_slowdown >= 1.0)) {
    throw ConfigError("anon_reclaim_slowdown must be >= 1");
  }
  if (recency_window_ms <= 0) {
    throw ConfigError("recency_window must be > 0");
  }
  const Tuning& t = tuning;
  if (t.foreground_block_max <= 0 || t.swap_block <= 0 ||
      t.file_drop_bytes_per_ms <= 0 || t.reclaim_batch <= 0 ||
      t.plan_quantum <= 0) {
    throw ConfigError("tuning sizes must be positive");
  }
  if (t.direct_reclaim_budget_ms < 0 || t.scan_interval_ms <= 0 ||
      t.scan_cost_ms < 0 || t.growth_horizon_ms <= 0 ||
      t.throughput_bucket_ms <= 0) {
    throw ConfigError("tuning durations out of range");
  }
  if (!(t.min_watermark_ratio > 0.0 && t.min_watermark_ratio <= 1.0 &&
        t.high_watermark_ratio >= 1.0)) {
    throw ConfigError("watermark ratios must satisfy 0 < min <= 1 <= high");
  }
  if (HighWatermark() >= UserMemory()) {
    throw ConfigError("high watermark exceeds user memory");
  }
  if (!(t.growth_factor >= 1.0) || !(t.hot_cpu_fraction >= 0.0) ||
      !(t.refault_fraction >= 0.0 && t.refault_fraction <= 1.0) ||
      !(t.kill_headroom >= 0.0)) {
    throw ConfigError("tuning ratios out of range");
  }
}

DeviceConfig DeviceConfigFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("device config must be an object");
  DeviceConfig config = DeviceConfig::Default();
  ReadOptional(j, "dram_total", &config.dram_total);
  ReadOptional(j, "sys_reserved", &config.sys_reserved);
  ReadOptional(j, "swap_capacity", &config.swap_capacity);
  ReadOptional(j, "zram_fraction", &config.zram_fraction);
  if (auto it = j.find("bandwidth_curve"); it != j.end()) {
    try {
      config.bandwidth_curve = CurveFromJson(*it);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("device config: key 'bandwidth_curve': ") +
                        e.what());
    }
  }
  ReadOptional(j, "reclaim_tick", &config.reclaim_tick_ms);
  ReadOptional(j, "preload_budget", &config.preload_budget);
  config.free_threshold = config.dram_total / 10;
  ReadOptional(j, "free_threshold", &config.free_threshold);
  ReadOptional(j, "alloc_threshold", &config.alloc_threshold);
  ReadOptional(j, "anon_reclaim_slowdown", &config.anon_reclaim_slowdown);
  ReadOptional(j, "recency_window", &config.recency_window_ms);
  if (auto it = j.find("tuning"); it != j.end()) {
    if (!it->is_object()) throw ConfigError("device config: 'tuning' must be an object");
    Tuning& t = config.tuning;
    ReadOptional(*it, "foreground_block_max", &t.foreground_block_max);
    ReadOptional(*it, "swap_block", &t.swap_block);
    ReadOptional(*it, "file_drop_bytes_per_ms", &t.file_drop_bytes_per_ms);
    ReadOptional(*it, "reclaim_batch", &t.reclaim_batch);
    ReadOptional(*it, "direct_reclaim_budget_ms", &t.direct_reclaim_budget_ms);
    ReadOptional(*it, "min_watermark_ratio", &t.min_watermark_ratio);
    ReadOptional(*it, "high_watermark_ratio", &t.high_watermark_ratio);
    ReadOptional(*it, "growth_factor", &t.growth_factor);
    ReadOptional(*it, "growth_horizon_ms", &t.growth_horizon_ms);
    ReadOptional(*it, "hot_cpu_fraction", &t.hot_cpu_fraction);
    ReadOptional(*it, "refault_fraction", &t.refault_fraction);
    ReadOptional(*it, "scan_interval_ms", &t.scan_interval_ms);
    ReadOptional(*it, "scan_cost_ms", &t.scan_cost_ms);
    ReadOptional(*it, "kill_headroom", &t.kill_headroom);
    ReadOptional(*it, "throughput_bucket_ms", &t.throughput_bucket_ms);
    ReadOptional(*it, "plan_quantum", &t.plan_quantum);
  }
  config.Validate();
  return config;
}

nlohmann::json DeviceConfigToJson(const DeviceConfig& config) {
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& p : config.bandwidth_curve) {
    curve.push_back({p.block_size, p.bytes_per_sec});
  }
  const Tuning& t = config.tuning;
  return {
      {"dram_total", config.dram_total},
      {"sys_reserved", config.sys_reserved},
      {"swap_capacity", config.swap_capacity},
      {"zram_fraction", config.zram_fraction},
      {"bandwidth_curve", curve},
      {"reclaim_tick", config.reclaim_tick_ms},
      {"preload_budget", config.preload_budget},
      {"free_threshold", config.free_threshold},
      {"alloc_threshold", config.alloc_threshold},
      {"anon_reclaim_slowdown", config.anon_reclaim_slowdown},
      {"recency_window", config.recency_window_ms},
      {"tuning",
       {{"foreground_block_max", t.foreground_block_max},
        {"swap_block", t.swap_block},
        {"file_drop_bytes_per_ms", t.file_drop_bytes_per_ms},
        {"reclaim_batch", t.reclaim_batch},
        {"direct_reclaim_budget_ms", t.direct_reclaim_budget_ms},
        {"min_watermark_ratio", t.min_watermark_ratio},
        {"high_watermark_ratio", t.high_watermark_ratio},
        {"growth_factor", t.growth_factor},
        {"growth_horizon_ms", t.growth_horizon_ms},
        {"hot_cpu_fraction", t.hot_cpu_fraction},
        {"refault_fraction", t.refault_fraction},
        {"scan_interval_ms", t.scan_interval_ms},
        {"scan_cost_ms", t.scan_cost_ms},
        {"kill_headroom", t.kill_headroom},
        {"throughput_bucket_ms", t.throughput_bucket_ms},
        {"plan_quantum", t.plan_quantum}}},
  };
}

DeviceConfig LoadDeviceConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open device config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("device config " + path.string() + ": " + e.what());
  }
  return DeviceConfigFromJson(j);
}

MemoryState MemoryState::Initial(const DeviceConfig& config,
                                 std::size_t apps) {
  MemoryState state;
  state.free = config.dram_total - config.sys_reserved;
  state.preloaded.assign(apps, 0);
  state.resident.assign(apps, Residency{});
  return state;
}

Bytes MemoryState::TotalPreloaded() const {
  return std::accumulate(preloaded.begin(), preloaded.end(), Bytes{0});
}

Bytes MemoryState::TotalResident() const {
  Bytes total = 0;
  for (const auto& r : resident) total += r.Total();
  return total;
}

std::optional<std::string> CheckMemoryInvariants(const DeviceConfig& config,
                                                 const MemoryState& state) {
  std::ostringstream why;
  if (state.free < 0) why << "free is negative (" << state.free << "); ";
  for (std::size_t i = 0; i < state.preloaded.size(); ++i) {
    if (state.preloaded[i] < 0) why << "preloaded[" << i << "] < 0; ";
  }
  for (std::size_t i = 0; i < state.resident.size(); ++i) {
    if (state.resident[i].file_backed < 0 || state.resident[i].anonymous < 0) {
      why << "resident[" << i << "] < 0; ";
    }
  }
  const Bytes sum = config.sys_reserved + state.free + state.TotalPreloaded() +
                    state.TotalResident();
  if (sum != config.dram_total) {
    why << "sys+free+preloaded+resident=" << sum
        << " != dram_total=" << config.dram_total << "; ";
  }
  if (state.swap_used < 0 || state.swap_used > config.SwapLimit()) {
    why << "swap_used=" << state.swap_used << " outside [0, "
        << config.SwapLimit() << "]; ";
  }
  std::string out = why.str();
  if (out.empty()) return std::nullopt;
  return out;
}

IoModel::IoModel(std::vector<BandwidthPoint> curve, double write_slowdown)
    : curve_(std::move(curve)), write_slowdown_(write_slowdown) {
  ValidateCurve(curve_);
  if (!(write_slowdown_ >= 1.0)) {
    throw ConfigError("write slowdown must be >= 1");
  }
}

IoModel::IoModel(const DeviceConfig& config)
    : IoModel(config.bandwidth_curve, config.anon_reclaim_slowdown) {}

double IoModel::Bandwidth(Bytes block_size) const {
  if (block_size <= curve_.front().block_size) {
    return curve_.front().bytes_per_sec;
  }
  if (block_size >= curve_.back().block_size) {
    return curve_.back().bytes_per_sec;
  }
  auto hi = std::upper_bound(
      curve_.begin(), curve_.end(), block_size,
      [](Bytes b, const BandwidthPoint& p) { return b < p.block_size; });
  auto lo = std::prev(hi);
  if (lo->block_size == block_size) return lo->bytes_per_sec;
  const double x0 = std::log2(static_cast<double>(lo->block_size));
  const double x1 = std::log2(static_cast<double>(hi->block_size));
  const double x = std::log2(static_cast<double>(block_size));
  const double t = (x - x0) / (x1 - x0);
  return lo->bytes_per_sec + t * (hi->bytes_per_sec - lo->bytes_per_sec);
}

double IoModel::SoloRate(const IoRequest& request) const {
  const double rate = Bandwidth(request.block_size);
  return request.direction == IoDirection::kWrite ? rate / write_slowdown_
                                                  : rate;
}

std::vector<StreamRate> IoModel::ContentionSplit(
    std::span<const IoRequest> requests) const {
  std::size_t foreground = 0;
  std::size_t low = 0;
  for (const auto& r : requests) {
    (r.priority == IoPriority::kForeground ? foreground : low)++;
  }
  std::vector<StreamRate> out;
  out.reserve(requests.size());
  for (const auto& r : requests) {
    double share = 0.0;
    if (r.priority == IoPriority::kForeground) {
      share = 1.0 / static_cast<double>(foreground);
    } else if (foreground == 0) {
      share = 1.0 / static_cast<double>(low);
    }
    out.push_back({r.stream_id, share, share * SoloRate(r)});
  }
  return out;
}

std::vector<Bytes> IoModel::BlockSizes() const {
  std::vector<Bytes> out;
  for (Bytes b = std::bit_ceil(static_cast<std::uint64_t>(min_block()));
       b <= max_block(); b *= 2) {
    out.push_back(b);
  }
  if (out.empty()) out.push_back(min_block());
  return out;
}

Bytes IoModel::BlockFor(Bytes length, Bytes cap) const {
  if (length <= 0) return min_block();
  const Bytes floor_pow2 =
      static_cast<Bytes>(std::bit_floor(static_cast<std::uint64_t>(length)));
  return std::max(min_block(), std::min(floor_pow2, cap));
}

double IoTimeMs(Bytes bytes, double bytes_per_sec) {
  if (!(bytes_per_sec > 0.0)) {
    throw ConfigError("effective bandwidth must be positive");
  }
  return static_cast<double>(bytes) / bytes_per_sec * 1000.0;
}

}  // namespace launchsim
