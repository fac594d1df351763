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

// Launch profiles, scenarios and the synthetic profile generator.

#ifndef LAUNCHSIM_WORKLOAD_H_
#define LAUNCHSIM_WORKLOAD_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "launchsim/platform.h"
#include "launchsim/units.h"

namespace launchsim {

struct Segment {
  Bytes offset = 0;
  Bytes length = 0;
  int access_count = 1;  // launches that touched this range
};

struct FileRecord {
  std::string file_id;
  Bytes size = 0;
  int access_count = 1;
  std::vector<Segment> segments;
};

struct CpuPhase {
  Micros duration_us = 0;
};

struct IoPhase {
  std::string file_id;
  Bytes offset = 0;
  Bytes length = 0;
};

using Phase = std::variant<CpuPhase, IoPhase>;

enum class AppClass { kGbScale, kLowMemory };

const char* AppClassName(AppClass c);
// Accepts "gb", "gb-scale", "low", "low-memory". Throws ParseError.
AppClass ParseAppClass(std::string_view name);

struct LaunchProfile {
  std::string app_id;
  AppClass app_class = AppClass::kLowMemory;
  std::vector<Phase> phases;
  Bytes total_file_bytes = 0;
  Bytes total_alloc = 0;
  double anon_file_split = 0.0;
  Bytes baseline_footprint = 0;
  std::vector<FileRecord> files;

  // Anonymous bytes a cold launch allocates.
  Bytes AnonBytes() const;
  Micros TotalCpu() const;
  const FileRecord* FindFile(std::string_view file_id) const;
  // Access count of the segment of `file` covering [offset, offset+length),
  // or the file's own count when no segment matches exactly.
  int AccessCountAt(const FileRecord& file, Bytes offset, Bytes length) const;
};

// Recomputes total_file_bytes from the phases. Throws ReferenceError for
// phases or segments pointing outside known files, ParseError for
// inconsistent totals.
void ValidateProfile(const LaunchProfile& profile);

enum class TimelineAction { kLaunch, kSwitch, kBackground };

const char* TimelineActionName(TimelineAction a);

struct TimelineEntry {
  Micros time_us = 0;
  TimelineAction action = TimelineAction::kLaunch;
  std::string app_id;
};

struct Scenario {
  std::string name;
  DeviceConfig device;
  std::vector<LaunchProfile> apps;
  std::vector<TimelineEntry> timeline;
  std::uint64_t seed = 0;

  // -1 when missing.
  int AppIndex(std::string_view app_id) const;
};

struct ScenarioOptions {
  // Replaces the seed stored in the file; generated apps follow it.
  std::optional<std::uint64_t> seed;
  // Where named device configs are looked up after the scenario's own
  // directory. Defaults to $LAUNCHSIM_CONFIG_DIR.
  std::optional<std::filesystem::path> config_dir;
};

// JSON lines: "profile" and "generate" objects describe apps, one
// "timeline" object carries the device, the seed and the events. Throws
// ParseError naming the line and field, ReferenceError for dangling ids.
Scenario ParseScenario(const std::filesystem::path& path,
                       const ScenarioOptions& options = {});
Scenario ParseScenarioText(std::string_view text,
                           const std::filesystem::path& base_dir,
                           const ScenarioOptions& options = {});

// Profile lines only; a timeline line is ignored if present.
std::vector<LaunchProfile> ParseProfiles(const std::filesystem::path& path,
                                         std::uint64_t seed = 0);

LaunchProfile ProfileFromJson(const nlohmann::json& j);
nlohmann::json ProfileToJson(const LaunchProfile& profile);

// Deterministic in (seed, class).
LaunchProfile GenerateProfile(std::uint64_t seed, AppClass app_class);

struct ProfileStats {
  std::int64_t small_count = 0;
  std::int64_t large_count = 0;
  Bytes small_bytes = 0;
  Bytes large_bytes = 0;

  double CountRatio() const;  // small / large
  double ByteRatio() const;   // small / large
};

// A file is small when its size is below `cutoff`.
ProfileStats ComputeProfileStats(const LaunchProfile& profile, Bytes cutoff);

// Directory searched for named device configs: `override`, else
// $LAUNCHSIM_CONFIG_DIR, else empty.
std::optional<std::filesystem::path> ConfigDirFromEnv();

}  // namespace launchsim

#endif  // LAUNCHSIM_WORKLOAD_H_
