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

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "launchsim/engine.h"
#include "launchsim/preloader.h"
#include "launchsim/workload.h"

namespace launchsim {
namespace {

std::filesystem::path ScenarioPath(const char* name) {
  return std::filesystem::path(LAUNCHSIM_SOURCE_DIR) / "scenarios" / name;
}

std::vector<LaunchProfile> Profiles(int n) {
  std::vector<LaunchProfile> out;
  for (int i = 0; i < n; ++i) {
    const AppClass c = i % 8 == 7 ? AppClass::kGbScale : AppClass::kLowMemory;
    out.push_back(GenerateProfile(static_cast<std::uint64_t>(i + 1), c));
  }
  return out;
}

void BM_Knapsack(benchmark::State& state) {
  const auto groups_n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<Bytes> weight(0, 50 * kMiB);
  std::uniform_real_distribution<double> cost(0.0, 2000.0);
  std::vector<std::vector<KnapsackItem>> groups(groups_n);
  for (auto& g : groups) {
    for (int c = 0; c < 7; ++c) g.push_back({weight(rng), cost(rng)});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(SolveMultipleChoiceKnapsack(groups, 100 * kMiB, kMiB));
  }
}
BENCHMARK(BM_Knapsack)->Arg(6)->Arg(17)->Arg(60);

void BM_PlanCutoffs(benchmark::State& state) {
  const auto profiles = Profiles(static_cast<int>(state.range(0)));
  const DeviceConfig dev = DeviceConfig::Default();
  const IoModel io(dev);
  const auto blocks = io.BlockSizes();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        PlanCutoffs(profiles, dev.preload_budget, blocks, io, dev.tuning.plan_quantum));
  }
}
BENCHMARK(BM_PlanCutoffs)->Arg(17)->Arg(60)->Unit(benchmark::kMicrosecond);

void BM_CandidatesGbScale(benchmark::State& state) {
  const LaunchProfile p = GenerateProfile(5, AppClass::kGbScale);
  const IoModel io(DeviceConfig::Default());
  const auto blocks = io.BlockSizes();
  for (auto _ : state) benchmark::DoNotOptimize(Candidates(p, blocks, io));
  state.counters["files"] = static_cast<double>(p.files.size());
}
BENCHMARK(BM_CandidatesGbScale)->Unit(benchmark::kMicrosecond);

void BM_SimulateTwoApp(benchmark::State& state) {
  const Scenario s = ParseScenario(ScenarioPath("two-app-trace.jsonl"));
  const auto policy = static_cast<PolicyKind>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Simulate(s, policy));
  state.SetLabel(PolicyName(policy));
}
BENCHMARK(BM_SimulateTwoApp)->DenseRange(0, 4)->Unit(benchmark::kMicrosecond);

void BM_SimulateHighWorkload(benchmark::State& state) {
  const Scenario s = ParseScenario(ScenarioPath("high-workload.jsonl"));
  const auto policy = static_cast<PolicyKind>(state.range(0));
  SimulationOptions o;
  o.check_invariants = state.range(1) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(Simulate(s, policy, o));
  state.SetLabel(std::string(PolicyName(policy)) +
                 (o.check_invariants ? "" : ", unchecked"));
}
BENCHMARK(BM_SimulateHighWorkload)
    ->ArgsProduct({{0, 1, 2, 3, 4}, {1}})
    ->Args({4, 0})
    ->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace launchsim

BENCHMARK_MAIN();
