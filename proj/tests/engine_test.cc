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

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "launchsim/engine.h"
#include "test_support.h"

namespace launchsim {
namespace {

using testing::At;
using testing::Cpu;
using testing::MakeProfile;
using testing::MakeScenario;
using testing::Read;
using testing::RecordsOf;
using testing::SourcePath;

constexpr auto kLaunch = TimelineAction::kLaunch;
constexpr auto kBackground = TimelineAction::kBackground;

// Checks memory accounting at every event boundary and keeps the last
// state it saw.
class ConservationObserver : public SimulationObserver {
 public:
  explicit ConservationObserver(const DeviceConfig& device) : device_(device) {}

  void OnEventBoundary(Micros now, const MemoryState& state) override {
    ++events;
    if (auto err = CheckMemoryInvariants(device_, state)) {
      if (!failure) failure = "t=" + std::to_string(now) + ": " + *err;
    }
    last = state;
  }
  void OnKill(Micros now, const Victim& v) override {
    kills.push_back({now, v.app_id});
  }

  std::int64_t events = 0;
  std::optional<std::string> failure;
  MemoryState last;
  std::vector<std::pair<Micros, std::string>> kills;

 private:
  DeviceConfig device_;
};

TEST(SimulateTest, EmptyTimelineGivesEmptyReport) {
  const LaunchProfile p = MakeProfile("a", {{"f", kMiB}}, {Read("f", kMiB)}, 2 * kMiB, kMiB);
  for (PolicyKind k : AllPolicies()) {
    const MetricsReport r =
        Simulate(MakeScenario("empty", DeviceConfig::Default(), {p}, {}), k);
    EXPECT_TRUE(r.records.empty());
    EXPECT_EQ(r.summary.launches, 0);
    EXPECT_EQ(r.direct_reclaim_count, 0);
    EXPECT_EQ(r.kill_count, 0);
  }
}

// Rate at step k of the default curve: 96 MiB/s times 22.8^(k/8).
double DefaultCurveRate(int step) {
  return 96.0 * kMiB * std::pow(22.8, step / 8.0);
}

Micros OracleIoMicros(Bytes length, double rate) {
  return static_cast<Micros>(std::ceil(static_cast<double>(length) / rate * 1e6));
}

TEST(SimulateTest, AmpleMemoryHasNoAllocTimeAndCurveIoTime) {
  // Lengths pick blocks of 128 KiB (step 5), 64 KiB (step 4) and 4 KiB.
  const LaunchProfile p = MakeProfile(
      "a", {{"big", 3 * kMiB}, {"mid", 64 * kKiB}, {"tiny", 4 * kKiB}},
      {Cpu(5), Read("big", 3 * kMiB), Read("mid", 64 * kKiB), Cpu(7),
       Read("tiny", 4 * kKiB)},
      64 * kMiB, 32 * kMiB);
  const MetricsReport r = Simulate(
      MakeScenario("ample", DeviceConfig::Default(), {p}, {At(0, kLaunch, "a")}),
      PolicyKind::kBaseline);
  ASSERT_EQ(r.records.size(), 1u);
  const LaunchRecord& rec = r.records[0];
  EXPECT_EQ(rec.kind, LaunchKind::kCold);
  EXPECT_EQ(rec.t_alloc_us, 0);
  EXPECT_EQ(rec.t_cpu_us, 12'000);
  const Micros io = OracleIoMicros(3 * kMiB, DefaultCurveRate(5)) +
                    OracleIoMicros(64 * kKiB, DefaultCurveRate(4)) +
                    OracleIoMicros(4 * kKiB, DefaultCurveRate(0));
  EXPECT_EQ(rec.t_io_us, io);
  EXPECT_EQ(r.direct_reclaim_count, 0);
}

// The event-by-event trace in docs/two-app-trace.md.
TEST(SimulateTest, TwoAppTraceMatchesHandTrace) {
  const Scenario s = ParseScenario(SourcePath("scenarios/two-app-trace.jsonl"));
  const MetricsReport r = Simulate(s, PolicyKind::kBaseline);
  ASSERT_EQ(r.records.size(), 4u);
  const auto& a0 = r.records[0];
  EXPECT_EQ(a0.app_id, "a");
  EXPECT_EQ(a0.kind, LaunchKind::kCold);
  EXPECT_EQ(a0.t_io_us, 7813);  // 1 MiB at 128 MiB/s, rounded up
  EXPECT_EQ(a0.t_cpu_us, 30'000);
  EXPECT_EQ(a0.total_us, 37'813);
  const auto& b0 = r.records[1];
  EXPECT_EQ(b0.app_id, "b");
  EXPECT_EQ(b0.t_io_us, 1954 + 15'625);
  EXPECT_EQ(b0.t_cpu_us, 5000);
  EXPECT_EQ(b0.total_us, 22'579);
  const auto& a1 = r.records[2];
  EXPECT_EQ(a1.kind, LaunchKind::kHot);
  EXPECT_TRUE(a1.relaunch);
  EXPECT_EQ(a1.total_us, 3000);
  const auto& b1 = r.records[3];
  EXPECT_EQ(b1.kind, LaunchKind::kHot);
  EXPECT_EQ(b1.total_us, 500);
  EXPECT_EQ(r.end_time_us, 300'500);
}

TEST(SimulateTest, HotRelaunchCostsAboutItsCpuTime) {
  const Scenario s = ParseScenario(SourcePath("scenarios/two-app-trace.jsonl"));
  for (PolicyKind k : AllPolicies()) {
    const MetricsReport r = Simulate(s, k);
    for (const auto& rec : r.records) {
      if (rec.kind != LaunchKind::kHot) continue;
      EXPECT_EQ(rec.t_io_us, 0) << PolicyName(k);
      EXPECT_EQ(rec.t_alloc_us, 0) << PolicyName(k);
      EXPECT_EQ(rec.total_us, rec.t_cpu_us) << PolicyName(k);
    }
  }
}

TEST(SimulateTest, PreloadedDuringLaunchStreamHidesIoBehindCpu) {
  const Scenario s = ParseScenario(SourcePath("scenarios/two-app-trace.jsonl"));
  const MetricsReport r = Simulate(s, PolicyKind::kAppFlow);
  const auto a = RecordsOf(r, "a");
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(a[0].t_io_us, 0);
  EXPECT_EQ(a[0].total_us, 30'000);
  EXPECT_EQ(r.peak_preloaded, 2 * kMiB);
}

TEST(SimulateTest, FullCoverageLeavesNoIoWithAmpleMemory) {
  std::vector<testing::FileSpec> files;
  std::vector<Phase> phases;
  for (int i = 0; i < 40; ++i) {
    files.push_back({"s" + std::to_string(i), 64 * kKiB});
    phases.push_back(Read(files.back().id, 64 * kKiB));
  }
  phases.push_back(Cpu(10));
  const LaunchProfile p = MakeProfile("a", files, phases, 8 * kMiB, 4 * kMiB);
  const Scenario s =
      MakeScenario("covered", DeviceConfig::Default(), {p}, {At(5000, kLaunch, "a")});
  const MetricsReport r = Simulate(s, PolicyKind::kAppFlow);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].t_io_us, 0);
  EXPECT_EQ(r.peak_preloaded, 40 * 64 * kKiB);
  const MetricsReport base = Simulate(s, PolicyKind::kBaseline);
  EXPECT_GT(base.records[0].t_io_us, 0);
}

// 1.5 GiB of DRAM with 256 MiB for the system. Each background app keeps
// 180 MiB; from four of them on, the 500 MiB target has to wait.
Scenario LowMemoryScenario(int background_apps) {
  const DeviceConfig d = testing::SmallDevice(1536 * kMiB, 256 * kMiB, 512 * kMiB);
  std::vector<LaunchProfile> apps;
  std::vector<TimelineEntry> t;
  for (int i = 0; i < background_apps; ++i) {
    const std::string id = "bg" + std::to_string(i);
    apps.push_back(MakeProfile(id, {{id + "f", 32 * kMiB}},
                               {Cpu(5), Read(id + "f", 32 * kMiB)}, 200 * kMiB,
                               180 * kMiB));
    t.push_back(At(1000.0 * i, kLaunch, id));
  }
  apps.push_back(MakeProfile("target", {{"tf", 16 * kMiB}},
                             {Cpu(10), Read("tf", 16 * kMiB), Cpu(10)}, 500 * kMiB,
                             200 * kMiB));
  t.push_back(At(1000.0 * background_apps + 1000, kLaunch, "target"));
  return MakeScenario("low-mem", d, std::move(apps), std::move(t));
}

TEST(SimulateTest, LowMemoryLaunchBlocksInDirectReclaim) {
  const MetricsReport r = Simulate(LowMemoryScenario(4), PolicyKind::kBaseline);
  EXPECT_GE(r.direct_reclaim_count, 1);
  const auto target = RecordsOf(r, "target");
  ASSERT_EQ(target.size(), 1u);
  EXPECT_GT(target[0].t_alloc_us, 0);
}

TEST(SimulateTest, MonotonePressureUnderBaseline) {
  Micros prev = -1;
  for (int n = 0; n <= 9; ++n) {
    const MetricsReport r = Simulate(LowMemoryScenario(n), PolicyKind::kBaseline);
    const auto target = RecordsOf(r, "target");
    ASSERT_EQ(target.size(), 1u);
    EXPECT_GE(target[0].t_alloc_us, prev) << n << " background apps";
    prev = target[0].t_alloc_us;
  }
  EXPECT_GT(prev, 0);
}

TEST(SimulateTest, BackgroundFootprintGrowsToFactorOverHorizon) {
  const LaunchProfile a =
      MakeProfile("a", {{"f", kMiB}}, {Cpu(5), Read("f", kMiB)}, 20 * kMiB, 10 * kMiB);
  const LaunchProfile b =
      MakeProfile("b", {{"g", kMiB}}, {Cpu(5), Read("g", kMiB)}, 4 * kMiB, 2 * kMiB);
  const Scenario s = MakeScenario(
      "growth", DeviceConfig::Default(), {a, b},
      {At(0, kLaunch, "a"), At(1000, kLaunch, "b"),
       At(1000 + 31 * 60 * 1000, kBackground, "b")});
  ConservationObserver obs(s.device);
  SimulationOptions o;
  o.observer = &obs;
  Simulate(s, PolicyKind::kBaseline, o);
  EXPECT_FALSE(obs.failure) << *obs.failure;
  EXPECT_EQ(obs.last.resident[0].Total(), 14 * kMiB);
}

TEST(SimulateTest, EveryRecordSatisfiesLatencyIdentity) {
  const Scenario s = ParseScenario(SourcePath("scenarios/high-workload.jsonl"));
  for (PolicyKind k : AllPolicies()) {
    const MetricsReport r = Simulate(s, k);
    ASSERT_FALSE(r.records.empty());
    for (const auto& rec : r.records) {
      EXPECT_EQ(rec.total_us, rec.t_io_us + rec.t_cpu_us + rec.t_alloc_us);
      EXPECT_EQ(rec.under_1s, !rec.failed && rec.total_us < kMicrosPerSecond);
    }
  }
}

TEST(SimulateTest, SameInputsGiveIdenticalReports) {
  const Scenario s = ParseScenario(SourcePath("scenarios/interference.jsonl"));
  for (PolicyKind k : AllPolicies()) {
    std::ostringstream log1, log2;
    SimulationOptions o1, o2;
    o1.event_log = &log1;
    o2.event_log = &log2;
    EXPECT_EQ(ReportToString(Simulate(s, k, o1)), ReportToString(Simulate(s, k, o2)));
    EXPECT_EQ(log1.str(), log2.str());
  }
}

TEST(SimulateTest, SwitchToKilledAppIsColdRelaunch) {
  const Scenario s = ParseScenario(SourcePath("scenarios/high-workload.jsonl"));
  ConservationObserver obs(s.device);
  SimulationOptions o;
  o.observer = &obs;
  const MetricsReport r = Simulate(s, PolicyKind::kBaseline, o);
  ASSERT_FALSE(obs.kills.empty());
  int checked = 0;
  for (const auto& [when, app] : obs.kills) {
    for (const auto& rec : RecordsOf(r, app)) {
      if (rec.start_us < when) continue;
      EXPECT_EQ(rec.kind, LaunchKind::kCold) << app;
      EXPECT_TRUE(rec.relaunch) << app;
      ++checked;
      break;
    }
  }
  EXPECT_GT(checked, 0);
  EXPECT_GE(r.summary.cold_relaunch_count, checked);
}

TEST(SimulateTest, RetentionKeepsPreloadedPagesThroughPressure) {
  const Scenario s = ParseScenario(SourcePath("scenarios/interference.jsonl"));
  const MetricsReport naive = Simulate(s, PolicyKind::kNaiveCombined);
  const MetricsReport flow = Simulate(s, PolicyKind::kAppFlow);
  ASSERT_GT(naive.protected_evicted, 0);
  EXPECT_EQ(flow.protected_evicted, 0);
  EXPECT_GT(flow.protected_skips, 0);
  const auto n = RecordsOf(naive, "target");
  const auto f = RecordsOf(flow, "target");
  ASSERT_EQ(n.size(), 1u);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_LT(f[0].t_io_us, n[0].t_io_us);
}

TEST(SimulateTest, EfficiencyFirstNeverWrites) {
  const Scenario s = ParseScenario(SourcePath("scenarios/high-workload.jsonl"));
  for (PolicyKind k : {PolicyKind::kReclaimOnly, PolicyKind::kAppFlow}) {
    const MetricsReport r = Simulate(s, k);
    EXPECT_GT(r.efficiency_first_calls, 0) << PolicyName(k);
    EXPECT_EQ(r.efficiency_first_io_write, 0) << PolicyName(k);
    EXPECT_EQ(r.efficiency_first_anon_freed, 0) << PolicyName(k);
  }
}

TEST(SimulatePropertyTest, ConservationHoldsUnderRandomEventSequences) {
  testing::Gen g(2026);
  for (int i = 0; i < 150; ++i) {
    const Scenario s = testing::RandomScenario(g, i);
    for (PolicyKind k : AllPolicies()) {
      ConservationObserver obs(s.device);
      SimulationOptions o;
      o.observer = &obs;
      MetricsReport r;
      ASSERT_NO_THROW(r = Simulate(s, k, o)) << s.name << " " << PolicyName(k);
      EXPECT_FALSE(obs.failure) << s.name << " " << PolicyName(k) << ": " << *obs.failure;
      EXPECT_LE(r.peak_swap_used, s.device.SwapLimit());
      if (Policy::For(k).retention) {
        EXPECT_EQ(r.protected_evicted, 0);
      }
      for (const auto& rec : r.records) {
        EXPECT_EQ(rec.total_us, rec.t_io_us + rec.t_cpu_us + rec.t_alloc_us);
      }
    }
  }
}

TEST(PolicyTest, BindingsPerPolicy) {
  const Policy af = Policy::For(PolicyKind::kAppFlow);
  EXPECT_TRUE(af.preload && af.adaptive_reclaim && af.retention && af.context_killer);
  const Policy nc = Policy::For(PolicyKind::kNaiveCombined);
  EXPECT_TRUE(nc.preload && nc.adaptive_reclaim);
  EXPECT_FALSE(nc.retention);
  const Policy po = Policy::For(PolicyKind::kPreloadOnly);
  EXPECT_TRUE(po.preload);
  EXPECT_FALSE(po.adaptive_reclaim || po.context_killer || po.retention);
  const Policy ro = Policy::For(PolicyKind::kReclaimOnly);
  EXPECT_FALSE(ro.preload);
  EXPECT_TRUE(ro.adaptive_reclaim);
  const Policy b = Policy::For(PolicyKind::kBaseline);
  EXPECT_FALSE(b.preload || b.adaptive_reclaim || b.context_killer || b.retention);
}

TEST(PolicyTest, ParsesNamesLoosely) {
  for (PolicyKind k : AllPolicies()) EXPECT_EQ(ParsePolicy(PolicyName(k)), k);
  EXPECT_EQ(ParsePolicy("AppFlow"), PolicyKind::kAppFlow);
  EXPECT_EQ(ParsePolicy("naive_combined"), PolicyKind::kNaiveCombined);
  EXPECT_EQ(ParsePolicy("Preload-Only"), PolicyKind::kPreloadOnly);
  EXPECT_FALSE(ParsePolicy("lru"));
  EXPECT_EQ(AllPolicies().size(), 5u);
}

}  // namespace
}  // namespace launchsim
