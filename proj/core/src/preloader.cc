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

#include "launchsim/preloader.h"

#include <algorithm>
#include <limits>
#include <unordered_map>

#include "launchsim/error.h"

namespace launchsim {

namespace {

std::vector<Bytes> SortedBlocks(std::span<const Bytes> block_sizes) {
  if (block_sizes.empty()) throw ConfigError("block size list is empty");
  std::vector<Bytes> blocks(block_sizes.begin(), block_sizes.end());
  std::sort(blocks.begin(), blocks.end());
  blocks.erase(std::unique(blocks.begin(), blocks.end()), blocks.end());
  if (blocks.front() <= 0) throw ConfigError("block sizes must be positive");
  return blocks;
}

std::unordered_map<std::string_view, const FileRecord*> IndexFiles(
    const LaunchProfile& profile) {
  std::unordered_map<std::string_view, const FileRecord*> index;
  index.reserve(profile.files.size());
  for (const auto& f : profile.files) index.emplace(f.file_id, &f);
  return index;
}

const AppCutoff& RequirePlan(const CutoffPlan& plan, const std::string& app_id) {
  const AppCutoff* entry = plan.Find(app_id);
  if (entry == nullptr) {
    throw ContractError("no cutoff planned for app " + app_id);
  }
  return *entry;
}

}  // namespace

std::vector<CutoffCandidate> Candidates(const LaunchProfile& profile,
                                        std::span<const Bytes> block_sizes,
                                        const IoModel& io) {
  const std::vector<Bytes> blocks = SortedBlocks(block_sizes);
  // bucket[j]: bytes of files that first count as small at blocks[j].
  std::vector<Bytes> bucket(blocks.size() + 1, 0);
  Bytes hot = 0;
  for (const auto& f : profile.files) {
    const auto j = static_cast<std::size_t>(
        std::upper_bound(blocks.begin(), blocks.end(), f.size) - blocks.begin());
    for (const auto& s : f.segments) {
      if (s.access_count >= kHotAccessCount) {
        hot += s.length;
      } else {
        bucket[j] += s.length;
      }
    }
  }
  std::vector<CutoffCandidate> out;
  out.reserve(blocks.size());
  Bytes small = 0;
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    small += bucket[j];
    CutoffCandidate c;
    c.cutoff = blocks[j];
    c.preload_size = std::min(profile.total_file_bytes, small + hot);
    c.stream_bw = io.Bandwidth(blocks[j]);
    c.predicted_io_ms =
        IoTimeMs(profile.total_file_bytes - c.preload_size, c.stream_bw);
    out.push_back(c);
  }
  return out;
}

KnapsackSolution SolveMultipleChoiceKnapsack(
    std::span<const std::vector<KnapsackItem>> groups, Bytes budget,
    Bytes quantum) {
  if (quantum <= 0) throw ConfigError("quantum must be positive");
  KnapsackSolution solution;
  const std::size_t n = groups.size();
  solution.choice.assign(n, 0);
  if (n == 0) return solution;
  for (const auto& g : groups) {
    if (g.empty()) throw ContractError("knapsack group without items");
  }

  const Bytes capacity = budget < 0 ? -1 : budget / quantum;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  bool feasible = capacity >= 0;
  std::vector<std::vector<Bytes>> qweight(n);
  for (std::size_t g = 0; g < n; ++g) {
    for (const auto& item : groups[g]) {
      qweight[g].push_back((item.weight + quantum - 1) / quantum);
    }
  }

  if (feasible) {
    const auto width = static_cast<std::size_t>(capacity) + 1;
    std::vector<double> dp(width, kInf);
    std::vector<double> next(width);
    std::vector<int> choice(n * width, -1);
    dp[0] = 0.0;
    for (std::size_t g = 0; g < n; ++g) {
      std::fill(next.begin(), next.end(), kInf);
      int* row = &choice[g * width];
      for (std::size_t c = 0; c < width; ++c) {
        if (dp[c] == kInf) continue;
        for (std::size_t j = 0; j < groups[g].size(); ++j) {
          const auto nc = c + static_cast<std::size_t>(qweight[g][j]);
          if (nc >= width) continue;
          const double v = dp[c] + groups[g][j].cost;
          if (v < next[nc]) {
            next[nc] = v;
            row[nc] = static_cast<int>(j);
          }
        }
      }
      dp.swap(next);
    }
    std::size_t best = width;
    for (std::size_t c = 0; c < width; ++c) {
      if (dp[c] != kInf && (best == width || dp[c] < dp[best])) best = c;
    }
    if (best == width) {
      feasible = false;
    } else {
      std::size_t c = best;
      for (std::size_t g = n; g-- > 0;) {
        const int j = choice[g * width + c];
        solution.choice[g] = j;
        c -= static_cast<std::size_t>(qweight[g][static_cast<std::size_t>(j)]);
      }
    }
  }

  if (!feasible) {
    solution.budget_exceeded = true;
    for (std::size_t g = 0; g < n; ++g) {
      std::size_t lightest = 0;
      for (std::size_t j = 1; j < groups[g].size(); ++j) {
        if (groups[g][j].weight < groups[g][lightest].weight) lightest = j;
      }
      solution.choice[g] = static_cast<int>(lightest);
    }
  }

  for (std::size_t g = 0; g < n; ++g) {
    const auto& item = groups[g][static_cast<std::size_t>(solution.choice[g])];
    solution.total_weight += item.weight;
    solution.objective += item.cost;
  }
  return solution;
}

const AppCutoff* CutoffPlan::Find(std::string_view app_id) const {
  for (const auto& a : apps) {
    if (a.app_id == app_id) return &a;
  }
  return nullptr;
}

CutoffPlan PlanCutoffs(std::span<const LaunchProfile> profiles, Bytes budget,
                       std::span<const Bytes> block_sizes, const IoModel& io,
                       Bytes quantum) {
  std::vector<std::vector<CutoffCandidate>> tables;
  std::vector<std::vector<KnapsackItem>> groups;
  tables.reserve(profiles.size());
  groups.reserve(profiles.size());
  for (const auto& p : profiles) {
    tables.push_back(Candidates(p, block_sizes, io));
    auto& items = groups.emplace_back();
    items.reserve(tables.back().size());
    for (const auto& c : tables.back()) {
      items.push_back({c.preload_size, c.predicted_io_ms});
    }
  }
  const KnapsackSolution s = SolveMultipleChoiceKnapsack(groups, budget, quantum);
  CutoffPlan plan;
  plan.budget_exceeded = s.budget_exceeded;
  plan.total_preload = s.total_weight;
  plan.objective = s.objective;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const auto j = static_cast<std::size_t>(s.choice[i]);
    plan.apps.push_back({profiles[i].app_id, j, tables[i][j]});
  }
  return plan;
}

void ProtectionRegistry::Publish(const std::string& app_id,
                                 std::set<std::string> file_ids) {
  ProtectedList& list = lists_[app_id];
  list.app_id = app_id;
  list.file_ids = std::move(file_ids);
  list.phase = ProtectionPhase::kBeforeLaunch;
}

void ProtectionRegistry::Extend(const std::string& app_id,
                                const std::set<std::string>& file_ids) {
  ProtectedList& list = lists_[app_id];
  list.app_id = app_id;
  if (list.phase == ProtectionPhase::kCleared) list.file_ids.clear();
  list.file_ids.insert(file_ids.begin(), file_ids.end());
  list.phase = ProtectionPhase::kDuringLaunch;
}

void ProtectionRegistry::Clear(const std::string& app_id) {
  auto it = lists_.find(app_id);
  if (it == lists_.end()) return;
  it->second.file_ids.clear();
  it->second.phase = ProtectionPhase::kCleared;
}

bool ProtectionRegistry::IsProtected(std::string_view app_id,
                                     std::string_view file_id) const {
  auto it = lists_.find(app_id);
  if (it == lists_.end() || it->second.phase == ProtectionPhase::kCleared) {
    return false;
  }
  return it->second.file_ids.find(std::string(file_id)) !=
         it->second.file_ids.end();
}

bool ProtectionRegistry::IsActive(std::string_view app_id) const {
  return PhaseOf(app_id) != ProtectionPhase::kCleared;
}

ProtectionPhase ProtectionRegistry::PhaseOf(std::string_view app_id) const {
  auto it = lists_.find(app_id);
  return it == lists_.end() ? ProtectionPhase::kCleared : it->second.phase;
}

bool ProtectionRegistry::AnyBeforeLaunch() const {
  for (const auto& [id, list] : lists_) {
    if (list.phase == ProtectionPhase::kBeforeLaunch) return true;
  }
  return false;
}

const ProtectedList* ProtectionRegistry::Find(std::string_view app_id) const {
  auto it = lists_.find(app_id);
  return it == lists_.end() ? nullptr : &it->second;
}

std::vector<std::size_t> BeforeLaunchPhases(const LaunchProfile& profile,
                                            Bytes cutoff) {
  const auto index = IndexFiles(profile);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < profile.phases.size(); ++i) {
    const auto* io = std::get_if<IoPhase>(&profile.phases[i]);
    if (io == nullptr) continue;
    auto it = index.find(io->file_id);
    if (it == index.end()) {
      throw ReferenceError("phase reads unknown file " + io->file_id);
    }
    const FileRecord& f = *it->second;
    if (f.size < cutoff ||
        profile.AccessCountAt(f, io->offset, io->length) >= kHotAccessCount) {
      out.push_back(i);
    }
  }
  return out;
}

std::vector<PreloadJob> BeforeLaunchJobs(const LaunchProfile& profile,
                                         const CutoffPlan& plan,
                                         const IoModel& io,
                                         ProtectionRegistry& registry) {
  const AppCutoff& entry = RequirePlan(plan, profile.app_id);
  std::vector<PreloadJob> jobs;
  std::set<std::string> files;
  for (std::size_t i : BeforeLaunchPhases(profile, entry.chosen.cutoff)) {
    const auto& phase = std::get<IoPhase>(profile.phases[i]);
    PreloadJob job;
    job.request.bytes_remaining = phase.length;
    job.request.block_size = io.min_block();
    job.request.priority = IoPriority::kLowPriority;
    job.request.direction = IoDirection::kRead;
    job.phase_index = i;
    job.file_id = phase.file_id;
    files.insert(phase.file_id);
    jobs.push_back(std::move(job));
  }
  registry.Publish(profile.app_id, std::move(files));
  return jobs;
}

DuringLaunchJob MakeDuringLaunchJob(const LaunchProfile& profile,
                                    const CutoffPlan& plan, const IoModel& io,
                                    std::span<const Bytes> loaded,
                                    ProtectionRegistry& registry) {
  const AppCutoff& entry = RequirePlan(plan, profile.app_id);
  DuringLaunchJob job;
  job.request.block_size =
      std::max(io.max_block(), entry.chosen.cutoff);
  job.request.priority = IoPriority::kLowPriority;
  job.request.direction = IoDirection::kRead;
  std::set<std::string> files;
  for (std::size_t i = 0; i < profile.phases.size(); ++i) {
    const auto* phase = std::get_if<IoPhase>(&profile.phases[i]);
    if (phase == nullptr) continue;
    const Bytes have = i < loaded.size() ? loaded[i] : 0;
    if (have >= phase->length) continue;
    job.request.bytes_remaining += phase->length - have;
    job.phases.push_back(i);
    files.insert(phase->file_id);
  }
  registry.Extend(profile.app_id, files);
  return job;
}

void ClearProtection(const std::string& app_id, ProtectionRegistry& registry) {
  registry.Clear(app_id);
}

}  // namespace launchsim
