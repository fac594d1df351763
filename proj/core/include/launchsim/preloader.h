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

// Per-app file-size cutoffs, the budgeted multiple-choice knapsack that
// picks them, and the preload jobs and protection lists they imply.

#ifndef LAUNCHSIM_PRELOADER_H_
#define LAUNCHSIM_PRELOADER_H_

#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "launchsim/platform.h"
#include "launchsim/units.h"
#include "launchsim/workload.h"

namespace launchsim {

struct CutoffCandidate {
  Bytes cutoff = 0;
  Bytes preload_size = 0;      // bytes loaded before launch
  double stream_bw = 0.0;      // bytes/s for the streamed remainder
  double predicted_io_ms = 0.0;
};

// Segments of files at least as large as the cutoff are still preloaded
// when touched by two or more launches.
inline constexpr int kHotAccessCount = 2;

// One candidate per block size, ascending. Throws ConfigError when
// `block_sizes` is empty.
std::vector<CutoffCandidate> Candidates(const LaunchProfile& profile,
                                        std::span<const Bytes> block_sizes,
                                        const IoModel& io);

struct KnapsackItem {
  Bytes weight = 0;
  double cost = 0.0;
};

struct KnapsackSolution {
  std::vector<int> choice;  // one item index per group
  Bytes total_weight = 0;
  double objective = 0.0;   // sum of chosen costs, in group order
  bool budget_exceeded = false;
};

// Picks exactly one item per group minimizing total cost subject to total
// weight <= budget. Weights are rounded up to multiples of `quantum`, so
// the answer is exact when weights and budget are multiples of it and
// feasible otherwise. Ties prefer less weight, then lower item indices.
// When even the lightest items do not fit, returns them with
// budget_exceeded set.
KnapsackSolution SolveMultipleChoiceKnapsack(
    std::span<const std::vector<KnapsackItem>> groups, Bytes budget,
    Bytes quantum);

struct AppCutoff {
  std::string app_id;
  std::size_t candidate_index = 0;
  CutoffCandidate chosen;
};

struct CutoffPlan {
  std::vector<AppCutoff> apps;  // same order as the input profiles
  Bytes total_preload = 0;
  double objective = 0.0;
  bool budget_exceeded = false;

  const AppCutoff* Find(std::string_view app_id) const;
};

CutoffPlan PlanCutoffs(std::span<const LaunchProfile> profiles, Bytes budget,
                       std::span<const Bytes> block_sizes, const IoModel& io,
                       Bytes quantum = kMiB);

enum class ProtectionPhase { kBeforeLaunch, kDuringLaunch, kCleared };

struct ProtectedList {
  std::string app_id;
  std::set<std::string> file_ids;
  ProtectionPhase phase = ProtectionPhase::kCleared;
};

// Lists published by the preloader and honored by the reclaimer.
class ProtectionRegistry {
 public:
  // Replaces any previous list for the app.
  void Publish(const std::string& app_id, std::set<std::string> file_ids);
  // Adds files and moves the list to kDuringLaunch.
  void Extend(const std::string& app_id, const std::set<std::string>& file_ids);
  // No-op when the app has no list.
  void Clear(const std::string& app_id);

  bool IsProtected(std::string_view app_id, std::string_view file_id) const;
  bool IsActive(std::string_view app_id) const;
  ProtectionPhase PhaseOf(std::string_view app_id) const;
  bool AnyBeforeLaunch() const;
  const ProtectedList* Find(std::string_view app_id) const;

 private:
  std::map<std::string, ProtectedList, std::less<>> lists_;
};

struct PreloadJob {
  IoRequest request;
  std::size_t phase_index = 0;
  std::string file_id;
};

// One low-priority read per io phase on a small file or hot segment, at
// the smallest block size. Registers the files as a kBeforeLaunch list.
// Throws ContractError when the plan has no entry for the app.
std::vector<PreloadJob> BeforeLaunchJobs(const LaunchProfile& profile,
                                         const CutoffPlan& plan,
                                         const IoModel& io,
                                         ProtectionRegistry& registry);

struct DuringLaunchJob {
  IoRequest request;                 // zero bytes when nothing is left
  std::vector<std::size_t> phases;   // io phases still to stream, in order
};

// Streams every io phase not fully present in `loaded` (bytes already in
// memory per phase index) at the largest block size, and extends the
// app's protection list with the streamed files.
DuringLaunchJob MakeDuringLaunchJob(const LaunchProfile& profile,
                                    const CutoffPlan& plan, const IoModel& io,
                                    std::span<const Bytes> loaded,
                                    ProtectionRegistry& registry);

void ClearProtection(const std::string& app_id, ProtectionRegistry& registry);

// Io phase indices that BeforeLaunchJobs would cover for `cutoff`.
std::vector<std::size_t> BeforeLaunchPhases(const LaunchProfile& profile,
                                            Bytes cutoff);

}  // namespace launchsim

#endif  // LAUNCHSIM_PRELOADER_H_
