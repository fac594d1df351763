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

#include "launchsim/reclaimer.h"

#include <algorithm>
#include <cmath>

#include "launchsim/error.h"

namespace launchsim {

AllocMeter::AllocMeter(Micros window_us) : window_(window_us) {
  if (window_ <= 0) throw ConfigError("alloc window must be positive");
}

void AllocMeter::Roll(Micros now) {
  if (now < start_ + window_) return;
  last_ = now < start_ + 2 * window_ ? count_ : 0;
  count_ = 0;
  start_ = now - now % window_;
}

void AllocMeter::RecordAlloc(Micros now, std::int64_t pages) {
  Roll(now);
  count_ += pages;
}

std::int64_t AllocMeter::SampleRate(Micros now) {
  Roll(now);
  return last_;
}

bool IsMemorySensitive(Bytes free, std::int64_t alloc_rate,
                       const DeviceConfig& config) {
  return free < config.free_threshold && alloc_rate > config.alloc_threshold;
}

const char* ReclaimModeName(ReclaimMode mode) {
  switch (mode) {
    case ReclaimMode::kEfficiencyFirst:
      return "efficiency_first";
    case ReclaimMode::kRebalancing:
      return "rebalancing";
    case ReclaimMode::kDefault:
      return "default";
  }
  return "?";
}

namespace {

class Planner {
 public:
  Planner(const ReclaimRequest& r, ReclaimOutcome* out) : r_(r), out_(out) {}

  Bytes TakeFile(Bytes want) {
    Bytes got = 0;
    want = std::min(want, Affordable(static_cast<double>(r_.file_drop_bytes_per_ms)));
    while (got < want && file_idx_ < r_.file_sources.size()) {
      const ReclaimSource& s = r_.file_sources[file_idx_];
      if (s.is_protected && r_.honor_protection) {
        out_->marked_active.push_back(s.id);
        out_->protected_skipped += s.available;
        ++file_idx_;
        continue;
      }
      const Bytes n = std::min(want - got, s.available - file_used_);
      if (n > 0) {
        Record(s, PageKind::kFileBacked, n);
        got += n;
        file_used_ += n;
        if (s.is_protected) out_->protected_evicted += n;
      }
      if (file_used_ >= s.available) {
        ++file_idx_;
        file_used_ = 0;
      }
    }
    out_->freed_file += got;
    out_->elapsed_ms += static_cast<double>(got) /
                        static_cast<double>(r_.file_drop_bytes_per_ms);
    return got;
  }

  Bytes TakeAnon(Bytes want) {
    if (!(r_.anon_write_bps > 0.0)) return 0;
    const double per_ms = r_.anon_write_bps / 1000.0;
    want = std::min({want, r_.swap_room - out_->freed_anon, Affordable(per_ms)});
    Bytes got = 0;
    while (got < want && anon_idx_ < r_.anon_sources.size()) {
      const ReclaimSource& s = r_.anon_sources[anon_idx_];
      const Bytes n = std::min(want - got, s.available - anon_used_);
      if (n > 0) {
        Record(s, PageKind::kAnonymous, n);
        got += n;
        anon_used_ += n;
      }
      if (anon_used_ >= s.available) {
        ++anon_idx_;
        anon_used_ = 0;
      }
    }
    out_->freed_anon += got;
    out_->io_write_bytes += got;
    out_->elapsed_ms += static_cast<double>(got) / per_ms;
    return got;
  }

 private:
  // Bytes that still fit in the time budget at `per_ms`.
  Bytes Affordable(double per_ms) const {
    if (std::isinf(r_.time_budget_ms)) return std::numeric_limits<Bytes>::max();
    const double left = r_.time_budget_ms - out_->elapsed_ms;
    if (left <= 0.0) return 0;
    return static_cast<Bytes>(std::floor(left * per_ms));
  }

  void Record(const ReclaimSource& s, PageKind kind, Bytes n) {
    if (!out_->takes.empty() && out_->takes.back().source_id == s.id &&
        out_->takes.back().kind == kind) {
      out_->takes.back().bytes += n;
      return;
    }
    out_->takes.push_back({s.id, kind, n, s.is_protected});
  }

  const ReclaimRequest& r_;
  ReclaimOutcome* out_;
  std::size_t file_idx_ = 0;
  Bytes file_used_ = 0;
  std::size_t anon_idx_ = 0;
  Bytes anon_used_ = 0;
};

void Alternate(Planner& p, Bytes batch, Bytes* remaining) {
  while (*remaining > 0) {
    const Bytes f = p.TakeFile(std::min(batch, *remaining));
    *remaining -= f;
    const Bytes a = p.TakeAnon(std::min(batch, *remaining));
    *remaining -= a;
    if (f == 0 && a == 0) break;
  }
}

}  // namespace

ReclaimOutcome Reclaim(const ReclaimRequest& r) {
  if (r.demand <= 0) throw ContractError("reclaim demand must be positive");
  if (r.batch <= 0 || r.file_drop_bytes_per_ms <= 0) {
    throw ContractError("reclaim batch and drop rate must be positive");
  }
  ReclaimOutcome out;
  out.mode = r.mode;
  out.direct_reclaim = r.direct;
  Planner p(r, &out);
  Bytes remaining = r.demand;
  switch (r.mode) {
    case ReclaimMode::kEfficiencyFirst:
      remaining -= p.TakeFile(remaining);
      break;
    case ReclaimMode::kRebalancing: {
      const auto target = static_cast<Bytes>(std::llround(
          static_cast<double>(r.episode.file_freed) * r.default_anon_per_file));
      const Bytes owed = std::max<Bytes>(0, target - r.episode.anon_freed);
      remaining -= p.TakeAnon(std::min(owed, remaining));
      Alternate(p, r.batch, &remaining);
      break;
    }
    case ReclaimMode::kDefault:
      Alternate(p, r.batch, &remaining);
      break;
  }
  out.shortfall = std::max<Bytes>(0, remaining);
  return out;
}

ReclaimMode SelectMode(bool sensitive, const EpisodeBalance& episode,
                       double default_anon_per_file, Bytes tolerance) {
  if (sensitive) return ReclaimMode::kEfficiencyFirst;
  const double owed =
      static_cast<double>(episode.file_freed) * default_anon_per_file -
      static_cast<double>(episode.anon_freed);
  if (owed > static_cast<double>(tolerance)) return ReclaimMode::kRebalancing;
  return ReclaimMode::kDefault;
}

TouchScanner::TouchScanner(Micros interval_us, Micros cost_us)
    : interval_(interval_us), cost_(cost_us) {
  if (interval_ <= 0) throw ConfigError("scan interval must be positive");
}

int TouchScanner::TouchProtected(Micros now, const ProtectionRegistry& registry) {
  if (!registry.AnyBeforeLaunch()) {
    next_ = -1;
    return 0;
  }
  if (next_ < 0) next_ = now + interval_;
  int ran = 0;
  while (next_ <= now) {
    ++ran;
    next_ += interval_;
  }
  scans_ += ran;
  cost_total_ += ran * cost_;
  return ran;
}

}  // namespace launchsim
