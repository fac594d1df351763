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

// Acceptance checks. Prints one PASS or FAIL line per criterion and exits
// non-zero when any fails. Thresholds are fixed below.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "launchsim/engine.h"
#include "launchsim/killer.h"
#include "launchsim/preloader.h"
#include "test_support.h"

namespace launchsim {
namespace {

using Clock = std::chrono::steady_clock;

// Thresholds.
constexpr int kKnapsackInstances = 1000;
constexpr double kKnapsackSeconds = 5.0;
constexpr int kPlannerProfiles = 60;
constexpr int kPlannerRepeats = 101;
constexpr double kPlannerMedianMs = 1.0;
constexpr int kFuzzSequences = 10'000;
constexpr double kRetentionIoRatio = 2.0;
constexpr double kLatencyCut = 0.25;
constexpr double kRelaunchCut = 0.40;
constexpr double kDirectReclaimCut = 0.40;
constexpr double kKillCut = 0.20;
constexpr double kHeadlineSeconds = 30.0;
constexpr std::uint64_t kSeeds[] = {1, 2, 3};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

// Watches every reclaim outcome and every event boundary of every run.
class Watch : public SimulationObserver {
 public:
  void OnEventBoundary(Micros /*now*/, const MemoryState& state) override {
    ++boundaries;
    if (device != nullptr && CheckMemoryInvariants(*device, state)) ++violations;
  }
  void OnReclaim(Micros /*now*/, const ReclaimOutcome& out) override {
    if (out.mode != ReclaimMode::kEfficiencyFirst) return;
    ++ef_outcomes;
    if (out.io_write_bytes != 0 || out.freed_anon != 0) ++ef_impure;
  }

  const DeviceConfig* device = nullptr;
  std::int64_t boundaries = 0;
  std::int64_t violations = 0;
  std::int64_t ef_outcomes = 0;
  std::int64_t ef_impure = 0;
};

Watch g_watch;

MetricsReport Run(const Scenario& s, PolicyKind k) {
  SimulationOptions o;
  o.observer = &g_watch;
  g_watch.device = &s.device;
  MetricsReport r = Simulate(s, k, o);
  g_watch.device = nullptr;
  return r;
}

// Lines are printed in criterion order once every check has run.
std::map<int, std::string> g_lines;
int g_failures = 0;

void Report(int id, bool pass, const std::string& detail) {
  if (!pass) ++g_failures;
  g_lines[id] = std::string(pass ? "PASS" : "FAIL") + " criterion " +
                std::to_string(id) + ": " + detail;
}

std::string Fmt(const char* fmt, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c, d);
  return buf;
}

double Change(double value, double reference) {
  return reference == 0.0 ? 0.0 : (value - reference) / reference;
}

// 1. Cutoff planning equals exhaustive search on random preload/latency
// tables.
void KnapsackOracle() {
  testing::Gen g(1);
  const auto start = Clock::now();
  int mismatches = 0;
  int infeasible = 0;
  for (int trial = 0; trial < kKnapsackInstances; ++trial) {
    const int apps = static_cast<int>(g.Int(1, 6));
    const int cutoffs = static_cast<int>(g.Int(1, 6));
    std::vector<std::vector<KnapsackItem>> groups(static_cast<std::size_t>(apps));
    Bytes heaviest = 0;
    for (auto& items : groups) {
      Bytes top = 0;
      for (int c = 0; c < cutoffs; ++c) {
        const Bytes preload = g.Int(0, 12'800) * kPageSize;  // up to 50 MiB
        items.push_back({preload, g.Real(0.0, 2000.0)});
        top = std::max(top, preload);
      }
      heaviest += top;
    }
    const Bytes budget = g.Int(0, heaviest + kMiB);
    const KnapsackSolution s = SolveMultipleChoiceKnapsack(groups, budget, kPageSize);

    double best = std::numeric_limits<double>::infinity();
    bool feasible = false;
    std::vector<std::size_t> pick(groups.size(), 0);
    for (;;) {
      Bytes w = 0;
      double cost = 0.0;
      for (std::size_t i = 0; i < groups.size(); ++i) {
        w += groups[i][pick[i]].weight;
        cost += groups[i][pick[i]].cost;
      }
      if (w <= budget && cost < best) {
        best = cost;
        feasible = true;
      }
      std::size_t i = 0;
      while (i < groups.size() && ++pick[i] == groups[i].size()) pick[i++] = 0;
      if (i == groups.size()) break;
    }
    if (!feasible) ++infeasible;
    const bool ok = feasible ? (!s.budget_exceeded && s.objective == best &&
                                s.total_weight <= budget)
                             : s.budget_exceeded;
    if (!ok) ++mismatches;
  }
  const double secs = Seconds(start);
  Report(1, mismatches == 0 && secs < kKnapsackSeconds,
         std::to_string(kKnapsackInstances) + " instances, " +
             std::to_string(mismatches) + " mismatches, " +
             std::to_string(infeasible) + " infeasible" +
             Fmt(", %.3f s (limit %.0f s)", secs, kKnapsackSeconds));
}

// 2. Median planning time for 60 profiles, mixed like the high workload.
void PlannerSpeed() {
  std::vector<LaunchProfile> profiles;
  for (int i = 0; i < kPlannerProfiles; ++i) {
    const AppClass c = i % 8 == 7 ? AppClass::kGbScale : AppClass::kLowMemory;
    profiles.push_back(GenerateProfile(static_cast<std::uint64_t>(i + 1), c));
  }
  const DeviceConfig dev = DeviceConfig::Default();
  const IoModel io(dev);
  const std::vector<Bytes> blocks = io.BlockSizes();
  std::vector<double> ms;
  bool over_budget = false;
  for (int r = 0; r < kPlannerRepeats; ++r) {
    const auto start = Clock::now();
    const CutoffPlan plan =
        PlanCutoffs(profiles, dev.preload_budget, blocks, io, dev.tuning.plan_quantum);
    ms.push_back(Seconds(start) * 1000.0);
    over_budget = plan.budget_exceeded;
  }
  std::sort(ms.begin(), ms.end());
  const double median = ms[ms.size() / 2];
  Report(2, median < kPlannerMedianMs,
         Fmt("median %.4f ms over %.0f runs of %.0f profiles (limit %.1f ms)", median,
             kPlannerRepeats, kPlannerProfiles, kPlannerMedianMs) +
             (over_budget ? ", lightest cutoffs exceed the budget" : ""));
}

// 3. Memory accounting at every event boundary of random runs.
void ConservationFuzz() {
  testing::Gen g(3);
  const std::vector<PolicyKind> policies = AllPolicies();
  const std::int64_t before = g_watch.boundaries;
  const std::int64_t violations_before = g_watch.violations;
  std::int64_t aborted = 0;
  std::int64_t swap_over = 0;
  const auto start = Clock::now();
  for (int i = 0; i < kFuzzSequences; ++i) {
    const Scenario s = testing::RandomScenario(g, i);
    const PolicyKind k = policies[static_cast<std::size_t>(i) % policies.size()];
    try {
      const MetricsReport r = Run(s, k);
      if (r.peak_swap_used > s.device.SwapLimit()) ++swap_over;
    } catch (const std::exception& e) {
      ++aborted;
      std::fprintf(stderr, "fuzz %d %s: %s\n", i, PolicyName(k), e.what());
    }
  }
  const std::int64_t boundaries = g_watch.boundaries - before;
  const std::int64_t violations = g_watch.violations - violations_before;
  Report(3, aborted == 0 && violations == 0 && swap_over == 0,
         std::to_string(kFuzzSequences) + " sequences, " + std::to_string(boundaries) +
             " event boundaries, " + std::to_string(violations + aborted + swap_over) +
             " violations" + Fmt(", %.1f s", Seconds(start)));
}

std::filesystem::path Scenarios() { return testing::SourcePath("scenarios"); }

// 4. Retention on the interference scenario.
void Retention() {
  const Scenario s = ParseScenario(Scenarios() / "interference.jsonl");
  const MetricsReport nc = Run(s, PolicyKind::kNaiveCombined);
  const MetricsReport af = Run(s, PolicyKind::kAppFlow);
  const auto nr = testing::RecordsOf(nc, "target");
  const auto ar = testing::RecordsOf(af, "target");
  if (nr.size() != 1 || ar.size() != 1) {
    Report(4, false, "target launch missing");
    return;
  }
  const double nc_io = nr[0].t_io_ms();
  const double af_io = ar[0].t_io_ms();
  const bool pass = nc.protected_evicted >= kPageSize && af.protected_evicted == 0 &&
                    nc_io >= kRetentionIoRatio * af_io && nc_io > af_io;
  Report(4, pass,
         Fmt("protected evicted %.0f B (naive) vs %.0f B (appflow); "
             "target t_io %.3f ms vs %.3f ms",
             static_cast<double>(nc.protected_evicted),
             static_cast<double>(af.protected_evicted), nc_io, af_io));
}

struct SeedRuns {
  std::uint64_t seed = 0;
  MetricsReport baseline, preload_only, reclaim_only, appflow;
};

std::vector<SeedRuns> HighWorkloadRuns(double* seconds) {
  std::vector<SeedRuns> out;
  const auto start = Clock::now();
  for (std::uint64_t seed : kSeeds) {
    ScenarioOptions o;
    o.seed = seed;
    const Scenario s = ParseScenario(Scenarios() / "high-workload.jsonl", o);
    SeedRuns r;
    r.seed = seed;
    r.baseline = Run(s, PolicyKind::kBaseline);
    r.appflow = Run(s, PolicyKind::kAppFlow);
    r.preload_only = Run(s, PolicyKind::kPreloadOnly);
    r.reclaim_only = Run(s, PolicyKind::kReclaimOnly);
    out.push_back(std::move(r));
  }
  *seconds = Seconds(start);
  return out;
}

// 5. AppFlow against Baseline on the high workload, at each seed.
void Headline(const std::vector<SeedRuns>& runs, double seconds) {
  bool pass = seconds < kHeadlineSeconds;
  std::string detail;
  for (const auto& r : runs) {
    const auto& b = r.baseline;
    const auto& a = r.appflow;
    const double lat = Change(a.summary.mean_cold_ms, b.summary.mean_cold_ms);
    const double rel = Change(static_cast<double>(a.summary.cold_relaunch_count),
                              static_cast<double>(b.summary.cold_relaunch_count));
    const double dr = Change(static_cast<double>(a.direct_reclaim_count),
                             static_cast<double>(b.direct_reclaim_count));
    const double kill =
        Change(static_cast<double>(a.kill_count), static_cast<double>(b.kill_count));
    const bool ok = lat <= -kLatencyCut && rel <= -kRelaunchCut &&
                    dr <= -kDirectReclaimCut && kill <= -kKillCut;
    pass = pass && ok;
    detail += "seed " + std::to_string(r.seed) + (ok ? " ok" : " short") +
              Fmt(" (latency %+.1f%%, cold relaunches %+.1f%%, ", 100 * lat, 100 * rel) +
              Fmt("direct reclaims %+.1f%%, kills %+.1f%%); ", 100 * dr, 100 * kill);
  }
  detail += Fmt("limits -%.0f/-%.0f/-%.0f/-%.0f%%", 100 * kLatencyCut,
                100 * kRelaunchCut, 100 * kDirectReclaimCut, 100 * kKillCut);
  detail += Fmt(", %.1f s for 3 seeds x 4 policies", seconds);
  Report(5, pass, detail);
}

// 6. Ablation signs at each seed.
void Ablation(const std::vector<SeedRuns>& runs) {
  bool pass = true;
  std::string detail;
  for (const auto& r : runs) {
    const double base_lat = r.baseline.summary.mean_cold_ms;
    const auto base_rel = static_cast<double>(r.baseline.summary.cold_relaunch_count);
    auto lat = [&](const MetricsReport& m) {
      return Change(m.summary.mean_cold_ms, base_lat);
    };
    auto rel = [&](const MetricsReport& m) {
      return Change(static_cast<double>(m.summary.cold_relaunch_count), base_rel);
    };
    const bool preload = lat(r.preload_only) < 0 && rel(r.preload_only) > 0;
    const bool reclaim =
        rel(r.reclaim_only) < 0 && lat(r.reclaim_only) > lat(r.appflow);
    const bool appflow = lat(r.appflow) < 0 && rel(r.appflow) < 0 &&
                         lat(r.appflow) < lat(r.reclaim_only) &&
                         rel(r.appflow) < rel(r.preload_only);
    const bool ok = preload && reclaim && appflow;
    pass = pass && ok;
    detail += "seed " + std::to_string(r.seed) + (ok ? " ok" : " wrong") +
              Fmt(" (latency/relaunch %%: preload %+.1f/%+.1f, ",
                  100 * lat(r.preload_only), 100 * rel(r.preload_only)) +
              Fmt("reclaim %+.1f/%+.1f, appflow %+.1f/%+.1f); ",
                  100 * lat(r.reclaim_only), 100 * rel(r.reclaim_only),
                  100 * lat(r.appflow), 100 * rel(r.appflow));
  }
  detail.resize(detail.size() - 2);
  Report(6, pass, detail);
}

// 8. The paired four-app killer fixture: two stale apps (A lean, B
// bloated) and two recent ones, at minute 60 with a 30 minute window.
void KillerOrdering() {
  constexpr Bytes kMB = 1'000'000;
  constexpr Micros kMinute = 60 * kMicrosPerSecond;
  auto app = [&](const char* id, Bytes cur, Bytes relaunch, Micros last) {
    KillCandidate c;
    c.app_id = id;
    c.current_footprint = cur * kMB;
    c.relaunch_footprint = relaunch * kMB;
    c.last_used_us = last;
    return c;
  };
  const std::vector<KillCandidate> apps = {app("A", 1200, 1100, 0),
                                           app("B", 1400, 1000, 10 * kMinute),
                                           app("C", 900, 500, 40 * kMinute),
                                           app("D", 300, 300, 50 * kMinute)};
  const KillDecision ctx = SelectVictims(apps, 1300 * kMB, 60 * kMinute, 30 * kMinute);
  const KillDecision lmk = LmkBaseline(apps, 1300 * kMB);
  auto ids = [](const KillDecision& d) {
    std::string s;
    for (const auto& v : d.victims) s += v.app_id;
    return s;
  };
  auto per_kill = [](const KillDecision& d) {
    double net = 0;
    for (const auto& v : d.victims) net += static_cast<double>(v.net_freed);
    return d.victims.empty() ? 0.0 : net / static_cast<double>(d.victims.size());
  };
  const bool pass = ids(ctx) == "B" && ctx.deferred == std::vector<std::string>{"C", "D"} &&
                    ids(lmk) == "AB" && per_kill(ctx) > per_kill(lmk);
  Report(8, pass,
         "context-aware kills [" + ids(ctx) + "], lmk kills [" + ids(lmk) + "]" +
             Fmt(", net freed per kill %.0f MB vs %.0f MB", per_kill(ctx) / kMB,
                 per_kill(lmk) / kMB));
}

// 9. Two runs of every bundled scenario under every policy.
void Determinism() {
  int pairs = 0;
  int differ = 0;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(Scenarios())) {
    if (e.path().extension() == ".jsonl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const Scenario s = ParseScenario(f);
    for (PolicyKind k : AllPolicies()) {
      ++pairs;
      if (ReportToString(Run(s, k)) != ReportToString(Run(s, k))) {
        ++differ;
        std::fprintf(stderr, "%s %s differs\n", f.filename().c_str(), PolicyName(k));
      }
    }
  }
  Report(9, differ == 0 && pairs > 0,
         std::to_string(files.size()) + " scenarios x 5 policies, " +
             std::to_string(differ) + " of " + std::to_string(pairs) +
             " run pairs differ");
}

// 7. Efficiency-first outcomes seen across every run above.
void EfficiencyFirstPurity() {
  Report(7, g_watch.ef_impure == 0 && g_watch.ef_outcomes > 0,
         std::to_string(g_watch.ef_outcomes) + " efficiency-first outcomes, " +
             std::to_string(g_watch.ef_impure) + " wrote or freed anonymous pages");
}

}  // namespace
}  // namespace launchsim

int main() {
  using namespace launchsim;
  KnapsackOracle();
  PlannerSpeed();
  ConservationFuzz();
  Retention();
  double seconds = 0.0;
  const auto runs = HighWorkloadRuns(&seconds);
  Headline(runs, seconds);
  Ablation(runs);
  KillerOrdering();
  Determinism();
  EfficiencyFirstPurity();
  for (const auto& [id, line] : g_lines) std::printf("%s\n", line.c_str());
  std::printf("%d criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
