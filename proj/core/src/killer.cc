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

#include "launchsim/killer.h"

#include <algorithm>

#include "launchsim/error.h"

namespace launchsim {

namespace {

// Ties on last use fall back to the id so results never depend on input
// order.
bool OlderFirst(const KillCandidate* a, const KillCandidate* b) {
  if (a->last_used_us != b->last_used_us) {
    return a->last_used_us < b->last_used_us;
  }
  return a->app_id < b->app_id;
}

void Take(const KillCandidate& c, KillPhase phase, KillDecision* d) {
  d->victims.push_back({c.app_id, c.tag, phase, c.current_footprint,
                        c.current_footprint - c.relaunch_footprint});
  d->freed += c.current_footprint;
}

}  // namespace

Bytes NetFreed(const KillCandidate& candidate) {
  if (candidate.foreground) {
    throw ContractError("foreground app " + candidate.app_id +
                        " is not a kill candidate");
  }
  return candidate.current_footprint - candidate.relaunch_footprint;
}

KillDecision SelectVictims(std::span<const KillCandidate> candidates,
                           Bytes demand, Micros now, Micros recency_window_us) {
  std::vector<const KillCandidate*> stale;
  std::vector<const KillCandidate*> recent;
  for (const auto& c : candidates) {
    if (c.foreground) continue;
    (now - c.last_used_us > recency_window_us ? stale : recent).push_back(&c);
  }
  std::sort(stale.begin(), stale.end(),
            [](const KillCandidate* a, const KillCandidate* b) {
              const Bytes da = NetFreed(*a);
              const Bytes db = NetFreed(*b);
              if (da != db) return da > db;
              return OlderFirst(a, b);
            });
  std::sort(recent.begin(), recent.end(), OlderFirst);

  KillDecision d;
  for (const auto* c : stale) {
    if (d.freed >= demand) break;
    Take(*c, KillPhase::kStale, &d);
  }
  for (const auto* c : recent) {
    if (d.freed >= demand) {
      d.deferred.push_back(c->app_id);
      continue;
    }
    Take(*c, KillPhase::kRecent, &d);
  }
  d.shortfall = d.freed < demand;
  return d;
}

KillDecision LmkBaseline(std::span<const KillCandidate> candidates,
                         Bytes demand) {
  std::vector<const KillCandidate*> order;
  for (const auto& c : candidates) {
    if (!c.foreground) order.push_back(&c);
  }
  std::sort(order.begin(), order.end(), OlderFirst);
  KillDecision d;
  for (const auto* c : order) {
    if (d.freed >= demand) break;
    Take(*c, KillPhase::kLru, &d);
  }
  d.shortfall = d.freed < demand;
  return d;
}

}  // namespace launchsim
