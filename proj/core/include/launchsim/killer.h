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

// Victim selection for process kills.

#ifndef LAUNCHSIM_KILLER_H_
#define LAUNCHSIM_KILLER_H_

#include <span>
#include <string>
#include <vector>

#include "launchsim/units.h"

namespace launchsim {

struct KillCandidate {
  std::string app_id;
  std::int64_t tag = 0;           // caller's handle, echoed in victims
  Bytes current_footprint = 0;
  Bytes relaunch_footprint = 0;   // what a fresh launch would hold
  Micros last_used_us = 0;
  bool foreground = false;
};

// Memory a kill gains net of what relaunching the app would take back.
// May be negative. Throws ContractError for a foreground app.
Bytes NetFreed(const KillCandidate& candidate);

enum class KillPhase { kStale, kRecent, kLru };

struct Victim {
  std::string app_id;
  std::int64_t tag = 0;
  KillPhase phase = KillPhase::kLru;
  Bytes footprint = 0;
  Bytes net_freed = 0;
};

struct KillDecision {
  std::vector<Victim> victims;   // kill order
  Bytes freed = 0;               // sum of victim footprints
  bool shortfall = false;        // candidates ran out before demand
  std::vector<std::string> deferred;  // recent apps left alone
};

// Apps idle longer than `recency_window_us` go first, by net freed memory
// descending and then least recently used. Recent apps follow in least
// recently used order only if stale ones do not cover `demand`.
// Foreground candidates are never chosen.
KillDecision SelectVictims(std::span<const KillCandidate> candidates,
                           Bytes demand, Micros now, Micros recency_window_us);

// Least recently used first until `demand` is covered.
KillDecision LmkBaseline(std::span<const KillCandidate> candidates,
                         Bytes demand);

}  // namespace launchsim

#endif  // LAUNCHSIM_KILLER_H_
