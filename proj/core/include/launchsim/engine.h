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

// Discrete-event simulation of app launches under a memory policy.

#ifndef LAUNCHSIM_ENGINE_H_
#define LAUNCHSIM_ENGINE_H_

#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "launchsim/killer.h"
#include "launchsim/metrics.h"
#include "launchsim/platform.h"
#include "launchsim/reclaimer.h"
#include "launchsim/workload.h"

namespace launchsim {

enum class PolicyKind {
  kBaseline,
  kPreloadOnly,
  kReclaimOnly,
  kNaiveCombined,
  kAppFlow,
};

struct Policy {
  PolicyKind kind = PolicyKind::kBaseline;
  bool preload = false;
  bool adaptive_reclaim = false;
  bool context_killer = false;
  bool retention = false;

  static Policy For(PolicyKind kind);
};

const char* PolicyName(PolicyKind kind);
// Accepts the names PolicyName() returns, case-insensitively, with '_'
// or '-' separators.
std::optional<PolicyKind> ParsePolicy(std::string_view name);
std::vector<PolicyKind> AllPolicies();

enum class EventKind {
  kLaunchRequest,
  kSwitchRequest,
  kBackgroundRequest,
  kIoProgress,
  kCpuDone,
  kAllocBurst,
  kReclaimStep,
  kReclaimTick,
  kScanTick,
  kLaunchComplete,
};

const char* EventKindName(EventKind kind);

// Hooks for tests and tools. Every callback is optional.
class SimulationObserver {
 public:
  virtual ~SimulationObserver() = default;
  virtual void OnEventBoundary(Micros /*now*/, const MemoryState& /*state*/) {}
  virtual void OnReclaim(Micros /*now*/, const ReclaimOutcome& /*outcome*/) {}
  virtual void OnKill(Micros /*now*/, const Victim& /*victim*/) {}
  virtual void OnLaunch(const LaunchRecord& /*record*/) {}
};

struct SimulationOptions {
  SimulationObserver* observer = nullptr;
  std::ostream* event_log = nullptr;  // JSON lines
  bool check_invariants = true;
};

// Runs the whole timeline and any work it leaves behind. Throws
// InvariantViolation when memory accounting breaks.
MetricsReport Simulate(const Scenario& scenario, PolicyKind policy,
                       const SimulationOptions& options = {});

}  // namespace launchsim

#endif  // LAUNCHSIM_ENGINE_H_
