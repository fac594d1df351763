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

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "launchsim/error.h"
#include "launchsim/killer.h"
#include "test_support.h"

namespace launchsim {
namespace {

constexpr Bytes kMB = 1'000'000;
constexpr Micros kMinute = 60 * kMicrosPerSecond;
constexpr Micros kWindow = 30 * kMinute;

KillCandidate App(const std::string& id, Bytes current_mb, Bytes relaunch_mb,
                  Micros last_used) {
  KillCandidate c;
  c.app_id = id;
  c.current_footprint = current_mb * kMB;
  c.relaunch_footprint = relaunch_mb * kMB;
  c.last_used_us = last_used;
  return c;
}

std::vector<std::string> Ids(const KillDecision& d) {
  std::vector<std::string> out;
  for (const auto& v : d.victims) out.push_back(v.app_id);
  return out;
}

// At minute 60 with a 30 minute window: A and B are stale, C and D recent.
std::vector<KillCandidate> FourApps() {
  return {App("A", 1200, 1100, 0),          // stale, lean: dM 100
          App("B", 1400, 1000, 10 * kMinute),  // stale, bloated: dM 400
          App("C", 900, 500, 40 * kMinute),    // recent, dM 400
          App("D", 300, 300, 50 * kMinute)};   // recent, dM 0
}

constexpr Micros kNow = 60 * kMinute;

TEST(NetFreedTest, Examples) {
  EXPECT_EQ(NetFreed(App("x", 500, 500, 0)), 0);
  EXPECT_EQ(NetFreed(App("x", 1200, 1100, 0)), 100 * kMB);
  EXPECT_EQ(NetFreed(App("x", 1400, 1000, 0)), 400 * kMB);
  EXPECT_EQ(NetFreed(App("x", 100, 300, 0)), -200 * kMB);
}

TEST(NetFreedTest, ForegroundIsContractError) {
  KillCandidate c = App("x", 1, 1, 0);
  c.foreground = true;
  EXPECT_THROW(NetFreed(c), ContractError);
}

TEST(SelectVictimsTest, OneStaleBloatedAppSuffices) {
  const auto d = SelectVictims(FourApps(), 1300 * kMB, kNow, kWindow);
  EXPECT_EQ(Ids(d), std::vector<std::string>{"B"});
  EXPECT_EQ(d.victims[0].phase, KillPhase::kStale);
  EXPECT_FALSE(d.shortfall);
  EXPECT_EQ(d.deferred, (std::vector<std::string>{"C", "D"}));
}

TEST(SelectVictimsTest, StaleByNetFreedThenRecentByLru) {
  const auto d = SelectVictims(FourApps(), 3000 * kMB, kNow, kWindow);
  EXPECT_EQ(Ids(d), (std::vector<std::string>{"B", "A", "C"}));
  EXPECT_EQ(d.victims[2].phase, KillPhase::kRecent);
  EXPECT_EQ(d.freed, 3500 * kMB);
}

TEST(SelectVictimsTest, ShortfallFlaggedWhenEverythingGoes) {
  const auto d = SelectVictims(FourApps(), 5000 * kMB, kNow, kWindow);
  EXPECT_EQ(Ids(d), (std::vector<std::string>{"B", "A", "C", "D"}));
  EXPECT_TRUE(d.shortfall);
}

TEST(SelectVictimsTest, AllRecentFallsBackToLru) {
  const std::vector<KillCandidate> c = {App("p", 100, 10, 50 * kMinute),
                                        App("q", 100, 90, 40 * kMinute)};
  const auto d = SelectVictims(c, 150 * kMB, kNow, kWindow);
  EXPECT_EQ(Ids(d), (std::vector<std::string>{"q", "p"}));
}

TEST(SelectVictimsTest, NoCandidatesIsShortfall) {
  const auto d = SelectVictims({}, kMB, kNow, kWindow);
  EXPECT_TRUE(d.victims.empty());
  EXPECT_TRUE(d.shortfall);
}

TEST(SelectVictimsTest, ForegroundNeverChosen) {
  auto c = FourApps();
  c[1].foreground = true;
  const auto d = SelectVictims(c, 5000 * kMB, kNow, kWindow);
  const auto ids = Ids(d);
  EXPECT_EQ(std::count(ids.begin(), ids.end(), "B"), 0);
}

TEST(LmkBaselineTest, OneAppIsChosenRegardless) {
  const auto d = LmkBaseline(std::vector<KillCandidate>{App("x", 10, 900, 0)}, kMB);
  EXPECT_EQ(Ids(d), std::vector<std::string>{"x"});
}

TEST(LmkBaselineTest, OlderGoesFirstWhateverItsNetFreed) {
  const std::vector<KillCandidate> c = {App("bloated", 1400, 1000, 20 * kMinute),
                                        App("lean", 500, 500, 5 * kMinute)};
  EXPECT_EQ(Ids(LmkBaseline(c, kMB)), std::vector<std::string>{"lean"});
}

TEST(LmkBaselineTest, FourAppFixtureDiffersFromContextAware) {
  const auto lmk = LmkBaseline(FourApps(), 1300 * kMB);
  const auto ctx = SelectVictims(FourApps(), 1300 * kMB, kNow, kWindow);
  EXPECT_EQ(Ids(lmk), (std::vector<std::string>{"A", "B"}));
  EXPECT_NE(Ids(lmk), Ids(ctx));
  auto per_kill = [](const KillDecision& d) {
    Bytes net = 0;
    for (const auto& v : d.victims) net += v.net_freed;
    return static_cast<double>(net) / static_cast<double>(d.victims.size());
  };
  EXPECT_GT(per_kill(ctx), per_kill(lmk));
}

// Random populations: stale victims come out by nonincreasing net freed,
// and recent apps appear only when the stale ones fall short.
TEST(SelectVictimsPropertyTest, OrderingAndDeferment) {
  testing::Gen g(8);
  for (int trial = 0; trial < 3000; ++trial) {
    std::vector<KillCandidate> c;
    Bytes stale_total = 0;
    for (int i = 0, n = static_cast<int>(g.Int(0, 8)); i < n; ++i) {
      KillCandidate k = App("a" + std::to_string(i), g.Int(0, 2000), g.Int(0, 2000),
                            g.Int(0, 60) * kMinute);
      k.foreground = g.Coin(0.1);
      if (!k.foreground && kNow - k.last_used_us > kWindow) {
        stale_total += k.current_footprint;
      }
      c.push_back(k);
    }
    const Bytes demand = g.Int(1, 6000) * kMB;
    const auto d = SelectVictims(c, demand, kNow, kWindow);
    Bytes prev = std::numeric_limits<Bytes>::max();
    bool seen_recent = false;
    for (const auto& v : d.victims) {
      if (v.phase == KillPhase::kStale) {
        EXPECT_FALSE(seen_recent);
        EXPECT_LE(v.net_freed, prev);
        prev = v.net_freed;
      } else {
        seen_recent = true;
        EXPECT_LT(stale_total, demand);
      }
    }
    if (!d.shortfall) {
      EXPECT_GE(d.freed, demand);
    }
  }
}

}  // namespace
}  // namespace launchsim
