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

// Device description, memory accounting and the flash I/O model.

#ifndef LAUNCHSIM_PLATFORM_H_
#define LAUNCHSIM_PLATFORM_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "launchsim/units.h"

namespace launchsim {

enum class PageKind { kFileBacked, kAnonymous };

struct BandwidthPoint {
  Bytes block_size = 0;
  double bytes_per_sec = 0.0;
};

// Knobs that are not hardware facts but shape how the engine drives the
// hardware. All of them are optional in the JSON form.
struct Tuning {
  Bytes foreground_block_max = 128 * kKiB;
  Bytes swap_block = 128 * kKiB;
  Bytes file_drop_bytes_per_ms = 64 * kMiB;
  Bytes reclaim_batch = 2 * kMiB;
  std::int64_t direct_reclaim_budget_ms = 200;
  double min_watermark_ratio = 0.5;
  double high_watermark_ratio = 1.5;
  double growth_factor = 1.4;
  std::int64_t growth_horizon_ms = 30 * 60 * 1000;
  double hot_cpu_fraction = 0.1;
  double refault_fraction = 0.25;
  std::int64_t scan_interval_ms = 10'000;
  std::int64_t scan_cost_ms = 10;
  double kill_headroom = 0.10;
  std::int64_t throughput_bucket_ms = 100;
  Bytes plan_quantum = kMiB;
};

struct DeviceConfig {
  Bytes dram_total = 12 * kGiB;
  Bytes sys_reserved = 2 * kGiB;
  Bytes swap_capacity = 2 * kGiB;
  double zram_fraction = 0.0;
  std::vector<BandwidthPoint> bandwidth_curve;
  std::int64_t reclaim_tick_ms = 100;
  Bytes preload_budget = 100 * kMiB;
  Bytes free_threshold = 0;
  std::int64_t alloc_threshold = 12800;  // pages per reclaim tick
  double anon_reclaim_slowdown = 5.0;
  std::int64_t recency_window_ms = 30 * 60 * 1000;
  Tuning tuning;

  // Seven-point curve from 4 KiB to 1 MiB, geometric in between, free
  // threshold at a tenth of DRAM.
  static DeviceConfig Default();

  Bytes SwapLimit() const;
  Bytes MinWatermark() const;
  Bytes LowWatermark() const { return free_threshold; }
  Bytes HighWatermark() const;
  Bytes UserMemory() const { return dram_total - sys_reserved; }

  // Throws ConfigError.
  void Validate() const;
};

std::vector<BandwidthPoint> DefaultBandwidthCurve();

// Missing keys fall back to DeviceConfig::Default(). Throws ConfigError.
DeviceConfig DeviceConfigFromJson(const nlohmann::json& j);
nlohmann::json DeviceConfigToJson(const DeviceConfig& config);
DeviceConfig LoadDeviceConfig(const std::filesystem::path& path);

// Per-app view of memory. Vectors are indexed by app position in the
// scenario.
struct Residency {
  Bytes file_backed = 0;
  Bytes anonymous = 0;
  Bytes Total() const { return file_backed + anonymous; }
};

struct MemoryState {
  Bytes free = 0;
  std::vector<Bytes> preloaded;
  std::vector<Residency> resident;
  Bytes swap_used = 0;

  static MemoryState Initial(const DeviceConfig& config, std::size_t apps);
  Bytes TotalPreloaded() const;
  Bytes TotalResident() const;
};

// Empty when sys + free + preloaded + resident == dram, every term is
// non-negative and swap stays inside its limit. Otherwise a diagnostic.
std::optional<std::string> CheckMemoryInvariants(const DeviceConfig& config,
                                                 const MemoryState& state);

enum class IoPriority { kForeground, kLowPriority };
enum class IoDirection { kRead, kWrite };

struct IoRequest {
  std::int64_t stream_id = 0;
  Bytes bytes_remaining = 0;
  Bytes block_size = 0;
  IoPriority priority = IoPriority::kForeground;
  IoDirection direction = IoDirection::kRead;
};

struct StreamRate {
  std::int64_t stream_id = 0;
  double share = 0.0;         // fraction of device time
  double bytes_per_sec = 0.0;
};

class IoModel {
 public:
  // Throws ConfigError on an empty or non-increasing curve.
  explicit IoModel(std::vector<BandwidthPoint> curve,
                   double write_slowdown = 1.0);
  explicit IoModel(const DeviceConfig& config);

  // Clamped at both ends, linear in log2(block) between points.
  double Bandwidth(Bytes block_size) const;

  // Rate a request gets with the device to itself. Writes are slower by
  // the configured factor.
  double SoloRate(const IoRequest& request) const;

  // Time-shares the device. Foreground streams split it evenly; low
  // priority streams split what foreground leaves, which is nothing
  // whenever a foreground stream is present.
  std::vector<StreamRate> ContentionSplit(
      std::span<const IoRequest> requests) const;

  Bytes min_block() const { return curve_.front().block_size; }
  Bytes max_block() const { return curve_.back().block_size; }
  const std::vector<BandwidthPoint>& curve() const { return curve_; }

  // Powers of two from min_block() to max_block().
  std::vector<Bytes> BlockSizes() const;

  // Largest power of two <= length, clamped to [min_block(), cap].
  Bytes BlockFor(Bytes length, Bytes cap) const;

 private:
  std::vector<BandwidthPoint> curve_;
  double write_slowdown_;
};

// Milliseconds to move `bytes` at `bytes_per_sec`. Throws ConfigError when
// the rate is not positive.
double IoTimeMs(Bytes bytes, double bytes_per_sec);

}  // namespace launchsim

#endif  // LAUNCHSIM_PLATFORM_H_
