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

// Allocation-rate metering, reclaim mode selection and page reclaim.

#ifndef LAUNCHSIM_RECLAIMER_H_
#define LAUNCHSIM_RECLAIMER_H_

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "launchsim/platform.h"
#include "launchsim/preloader.h"
#include "launchsim/units.h"

namespace launchsim {

// Counts allocated pages in fixed windows aligned to multiples of the
// window length.
class AllocMeter {
 public:
  explicit AllocMeter(Micros window_us = 100 * kMicrosPerMilli);

  void RecordAlloc(Micros now, std::int64_t pages);
  // Pages allocated in the most recent window that ended at or before
  // `now`.
  std::int64_t SampleRate(Micros now);

  Micros window() const { return window_; }

 private:
  void Roll(Micros now);

  Micros window_;
  Micros start_ = 0;
  std::int64_t count_ = 0;
  std::int64_t last_ = 0;
};

// Both comparisons are strict.
bool IsMemorySensitive(Bytes free, std::int64_t alloc_rate,
                       const DeviceConfig& config);

enum class ReclaimMode { kEfficiencyFirst, kRebalancing, kDefault };

const char* ReclaimModeName(ReclaimMode mode);

struct ReclaimSource {
  std::int64_t id = 0;
  Bytes available = 0;
  bool is_protected = false;
};

// File and anonymous bytes freed so far in the current pressure episode.
struct EpisodeBalance {
  Bytes file_freed = 0;
  Bytes anon_freed = 0;
};

struct ReclaimRequest {
  Bytes demand = 0;
  ReclaimMode mode = ReclaimMode::kDefault;
  std::span<const ReclaimSource> file_sources;  // least recently used first
  std::span<const ReclaimSource> anon_sources;  // least recently used first
  bool honor_protection = true;
  bool direct = false;
  Bytes swap_room = 0;
  double anon_write_bps = 0.0;
  Bytes file_drop_bytes_per_ms = 64 * kMiB;
  Bytes batch = 2 * kMiB;
  double time_budget_ms = std::numeric_limits<double>::infinity();
  EpisodeBalance episode;
  // Anonymous bytes per file byte that default reclaim converges to.
  double default_anon_per_file = 1.0;
};

struct ReclaimTake {
  std::int64_t source_id = 0;
  PageKind kind = PageKind::kFileBacked;
  Bytes bytes = 0;
  bool was_protected = false;
};

struct ReclaimOutcome {
  ReclaimMode mode = ReclaimMode::kDefault;
  Bytes freed_file = 0;
  Bytes freed_anon = 0;
  Bytes io_write_bytes = 0;
  double elapsed_ms = 0.0;
  bool direct_reclaim = false;
  Bytes shortfall = 0;
  Bytes protected_skipped = 0;
  Bytes protected_evicted = 0;
  std::vector<ReclaimTake> takes;
  std::vector<std::int64_t> marked_active;  // protected sources skipped

  Bytes Freed() const { return freed_file + freed_anon; }
};

// Pure: decides what to free and what it costs, touches no state.
// Throws ContractError when demand is not positive.
ReclaimOutcome Reclaim(const ReclaimRequest& request);

// Mode for the adaptive reclaimer: efficiency first under sensitivity,
// rebalancing while the episode is skewed toward file pages, default
// otherwise.
ReclaimMode SelectMode(bool sensitive, const EpisodeBalance& episode,
                       double default_anon_per_file, Bytes tolerance);

// Periodic touch of before-launch pages so they stay young.
class TouchScanner {
 public:
  TouchScanner(Micros interval_us, Micros cost_us);

  // Runs the scans due by `now`; returns how many ran. Scans are spaced
  // one interval apart starting one interval after a list first appears.
  int TouchProtected(Micros now, const ProtectionRegistry& registry);

  std::int64_t scans() const { return scans_; }
  Micros cost_us() const { return cost_total_; }

 private:
  Micros interval_;
  Micros cost_;
  Micros next_ = -1;
  std::int64_t scans_ = 0;
  Micros cost_total_ = 0;
};

}  // namespace launchsim

#endif  // LAUNCHSIM_RECLAIMER_H_
