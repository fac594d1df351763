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

#include "launchsim/workload.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "launchsim/error.h"

namespace launchsim {

namespace {

using nlohmann::json;

std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Field access that reports the line and key on failure.
class LineReader {
 public:
  LineReader(const json& obj, int line) : obj_(obj), line_(line) {}

  bool Has(const char* key) const { return obj_.contains(key); }

  const json& Raw(const char* key) const {
    auto it = obj_.find(key);
    if (it == obj_.end()) throw ParseError(line_, key, "missing");
    return *it;
  }

  template <typename T>
  T Get(const char* key) const {
    const json& v = Raw(key);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw ParseError(line_, key, "wrong type: " + v.dump());
    }
  }

  template <typename T>
  T GetOr(const char* key, T fallback) const {
    return Has(key) ? Get<T>(key) : fallback;
  }

  int line() const { return line_; }

 private:
  const json& obj_;
  int line_;
};

Bytes NonNegative(const LineReader& r, const char* key) {
  const Bytes v = r.Get<Bytes>(key);
  if (v < 0) throw ParseError(r.line(), key, "must be >= 0");
  return v;
}

Segment SegmentFromJson(const json& s, int line) {
  Segment seg;
  try {
    if (s.is_array() && (s.size() == 2 || s.size() == 3)) {
      seg.offset = s[0].get<Bytes>();
      seg.length = s[1].get<Bytes>();
      if (s.size() == 3) seg.access_count = s[2].get<int>();
    } else if (s.is_object()) {
      seg.offset = s.at("offset").get<Bytes>();
      seg.length = s.at("length").get<Bytes>();
      seg.access_count = s.value("access_count", 1);
    } else {
      throw ParseError(line, "segments",
                       "expected [offset, length] or [offset, length, count]");
    }
  } catch (const json::exception&) {
    throw ParseError(line, "segments", "bad segment " + s.dump());
  }
  return seg;
}

LaunchProfile ProfileFromLine(const json& j, int line) {
  LineReader r(j, line);
  LaunchProfile p;
  p.app_id = r.Get<std::string>("app_id");
  if (p.app_id.empty()) throw ParseError(line, "app_id", "empty");
  if (r.Has("class")) {
    try {
      p.app_class = ParseAppClass(r.Get<std::string>("class"));
    } catch (const ParseError& e) {
      throw ParseError(line, "class", e.message());
    }
  }

  const json& files = r.Raw("files");
  if (!files.is_array()) throw ParseError(line, "files", "expected array");
  for (const json& f : files) {
    if (!f.is_object()) throw ParseError(line, "files", "expected objects");
    LineReader fr(f, line);
    FileRecord rec;
    rec.file_id = fr.Get<std::string>("id");
    rec.size = NonNegative(fr, "size");
    rec.access_count = fr.GetOr<int>("access_count", 1);
    if (fr.Has("segments")) {
      const json& segs = fr.Raw("segments");
      if (!segs.is_array()) throw ParseError(line, "segments", "expected array");
      for (const json& s : segs) rec.segments.push_back(SegmentFromJson(s, line));
    } else {
      rec.segments.push_back({0, rec.size, rec.access_count});
    }
    p.files.push_back(std::move(rec));
  }

  const json& phases = r.Raw("phases");
  if (!phases.is_array()) throw ParseError(line, "phases", "expected array");
  for (const json& ph : phases) {
    if (!ph.is_object()) throw ParseError(line, "phases", "expected objects");
    LineReader pr(ph, line);
    if (pr.Has("cpu_ms")) {
      const double ms = pr.Get<double>("cpu_ms");
      if (!(ms >= 0.0)) throw ParseError(line, "cpu_ms", "must be >= 0");
      p.phases.push_back(CpuPhase{std::llround(ms * kMicrosPerMilli)});
    } else if (pr.Has("file")) {
      IoPhase io;
      io.file_id = pr.Get<std::string>("file");
      io.offset = NonNegative(pr, "offset");
      io.length = NonNegative(pr, "length");
      p.phases.push_back(std::move(io));
    } else {
      throw ParseError(line, "phases", "phase needs 'cpu_ms' or 'file'");
    }
  }

  Bytes io_bytes = 0;
  for (const auto& ph : p.phases) {
    if (const auto* io = std::get_if<IoPhase>(&ph)) io_bytes += io->length;
  }
  p.total_file_bytes = r.GetOr<Bytes>("total_file_bytes", io_bytes);
  if (p.total_file_bytes != io_bytes) {
    throw ParseError(line, "total_file_bytes",
                     "does not match the sum of io phase lengths (" +
                         std::to_string(io_bytes) + ")");
  }
  p.total_alloc = NonNegative(r, "total_alloc");
  p.anon_file_split = r.Get<double>("anon_file_split");
  p.baseline_footprint = NonNegative(r, "baseline_footprint");
  try {
    ValidateProfile(p);
  } catch (const ParseError& e) {
    throw ParseError(line, e.field(), e.message());
  } catch (const ReferenceError& e) {
    throw ReferenceError("line " + std::to_string(line) + ": " + e.what());
  }
  return p;
}

TimelineAction ParseAction(const std::string& s, int line) {
  if (s == "launch") return TimelineAction::kLaunch;
  if (s == "switch") return TimelineAction::kSwitch;
  if (s == "background") return TimelineAction::kBackground;
  throw ParseError(line, "action", "unknown action '" + s + "'");
}

std::optional<std::filesystem::path> FindConfig(
    const std::string& name, const std::filesystem::path& base_dir,
    const ScenarioOptions& options) {
  namespace fs = std::filesystem;
  fs::path p(name);
  if (p.is_absolute()) {
    if (fs::exists(p)) return p;
    return std::nullopt;
  }
  std::vector<fs::path> dirs;
  if (options.config_dir) dirs.push_back(*options.config_dir);
  if (auto env = ConfigDirFromEnv()) dirs.push_back(*env);
  dirs.push_back(base_dir);
  dirs.push_back(base_dir / ".." / "configs");
  for (const auto& dir : dirs) {
    if (fs::exists(dir / p)) return dir / p;
    if (fs::exists(dir / (name + ".json"))) return dir / (name + ".json");
  }
  return std::nullopt;
}

struct PendingGenerate {
  std::string app_id;
  AppClass app_class;
  std::uint64_t seed_offset;
};

}  // namespace

const char* AppClassName(AppClass c) {
  return c == AppClass::kGbScale ? "gb" : "low";
}

AppClass ParseAppClass(std::string_view name) {
  if (name == "gb" || name == "gb-scale" || name == "GbScale") {
    return AppClass::kGbScale;
  }
  if (name == "low" || name == "low-memory" || name == "LowMemory") {
    return AppClass::kLowMemory;
  }
  throw ParseError(0, "class", "unknown app class '" + std::string(name) + "'");
}

const char* TimelineActionName(TimelineAction a) {
  switch (a) {
    case TimelineAction::kLaunch:
      return "launch";
    case TimelineAction::kSwitch:
      return "switch";
    case TimelineAction::kBackground:
      return "background";
  }
  return "?";
}

Bytes LaunchProfile::AnonBytes() const {
  return std::max<Bytes>(0, total_alloc - total_file_bytes);
}

Micros LaunchProfile::TotalCpu() const {
  Micros total = 0;
  for (const auto& ph : phases) {
    if (const auto* cpu = std::get_if<CpuPhase>(&ph)) total += cpu->duration_us;
  }
  return total;
}

const FileRecord* LaunchProfile::FindFile(std::string_view file_id) const {
  for (const auto& f : files) {
    if (f.file_id == file_id) return &f;
  }
  return nullptr;
}

int LaunchProfile::AccessCountAt(const FileRecord& file, Bytes offset,
                                 Bytes length) const {
  for (const auto& s : file.segments) {
    if (s.offset == offset && s.length == length) return s.access_count;
  }
  return file.access_count;
}

void ValidateProfile(const LaunchProfile& p) {
  std::unordered_map<std::string_view, const FileRecord*> by_id;
  for (const auto& f : p.files) {
    if (f.size <= 0) throw ParseError(0, "size", "file " + f.file_id + " is empty");
    if (!by_id.emplace(f.file_id, &f).second) {
      throw ParseError(0, "files", "duplicate file id " + f.file_id);
    }
    for (const auto& s : f.segments) {
      if (s.offset < 0 || s.length <= 0 || s.offset + s.length > f.size) {
        throw ReferenceError("segment [" + std::to_string(s.offset) + ", +" +
                             std::to_string(s.length) + ") outside file " +
                             f.file_id);
      }
    }
  }
  Bytes io_bytes = 0;
  for (const auto& ph : p.phases) {
    const auto* io = std::get_if<IoPhase>(&ph);
    if (io == nullptr) continue;
    auto it = by_id.find(io->file_id);
    if (it == by_id.end()) {
      throw ReferenceError("phase reads unknown file " + io->file_id);
    }
    if (io->length <= 0 || io->offset < 0 ||
        io->offset + io->length > it->second->size) {
      throw ReferenceError("phase range outside file " + io->file_id);
    }
    io_bytes += io->length;
  }
  if (io_bytes != p.total_file_bytes) {
    throw ParseError(0, "total_file_bytes", "does not match io phases");
  }
  if (!(p.anon_file_split >= 0.0 && p.anon_file_split <= 1.0)) {
    throw ParseError(0, "anon_file_split", "must be in [0, 1]");
  }
  if (p.total_alloc < p.total_file_bytes) {
    throw ParseError(0, "total_alloc", "smaller than the bytes read");
  }
  if (p.baseline_footprint > p.total_alloc) {
    throw ParseError(0, "baseline_footprint", "exceeds total_alloc");
  }
}

int Scenario::AppIndex(std::string_view app_id) const {
  for (std::size_t i = 0; i < apps.size(); ++i) {
    if (apps[i].app_id == app_id) return static_cast<int>(i);
  }
  return -1;
}

std::optional<std::filesystem::path> ConfigDirFromEnv() {
  const char* env = std::getenv("LAUNCHSIM_CONFIG_DIR");
  if (env == nullptr || *env == '\0') return std::nullopt;
  return std::filesystem::path(env);
}

LaunchProfile ProfileFromJson(const json& j) { return ProfileFromLine(j, 0); }

json ProfileToJson(const LaunchProfile& p) {
  json files = json::array();
  for (const auto& f : p.files) {
    json segs = json::array();
    for (const auto& s : f.segments) {
      if (s.access_count == 1) {
        segs.push_back({s.offset, s.length});
      } else {
        segs.push_back({s.offset, s.length, s.access_count});
      }
    }
    files.push_back({{"id", f.file_id},
                     {"size", f.size},
                     {"access_count", f.access_count},
                     {"segments", segs}});
  }
  json phases = json::array();
  for (const auto& ph : p.phases) {
    if (const auto* cpu = std::get_if<CpuPhase>(&ph)) {
      phases.push_back({{"cpu_ms", MicrosToMillis(cpu->duration_us)}});
    } else {
      const auto& io = std::get<IoPhase>(ph);
      phases.push_back(
          {{"file", io.file_id}, {"offset", io.offset}, {"length", io.length}});
    }
  }
  return {{"type", "profile"},
          {"app_id", p.app_id},
          {"class", AppClassName(p.app_class)},
          {"total_file_bytes", p.total_file_bytes},
          {"total_alloc", p.total_alloc},
          {"anon_file_split", p.anon_file_split},
          {"baseline_footprint", p.baseline_footprint},
          {"files", files},
          {"phases", phases}};
}

Scenario ParseScenarioText(std::string_view text,
                           const std::filesystem::path& base_dir,
                           const ScenarioOptions& options) {
  Scenario scenario;
  scenario.device = DeviceConfig::Default();
  std::vector<std::pair<int, std::variant<LaunchProfile, PendingGenerate>>> apps;
  std::optional<json> timeline;
  int timeline_line = 0;

  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto first = raw.find_first_not_of(" \t\r");
    if (first == std::string::npos || raw[first] == '#') continue;
    json j;
    try {
      j = json::parse(raw);
    } catch (const json::exception& e) {
      throw ParseError(line, "", std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(line, "", "expected an object");
    LineReader r(j, line);
    const std::string type = r.Get<std::string>("type");
    if (type == "profile") {
      apps.emplace_back(line, ProfileFromLine(j, line));
    } else if (type == "generate") {
      PendingGenerate g;
      g.app_id = r.Get<std::string>("app_id");
      try {
        g.app_class = ParseAppClass(r.Get<std::string>("class"));
      } catch (const ParseError& e) {
        throw ParseError(line, "class", e.message());
      }
      g.seed_offset = r.GetOr<std::uint64_t>("seed_offset", 0);
      apps.emplace_back(line, std::move(g));
    } else if (type == "timeline") {
      if (timeline) throw ParseError(line, "type", "second timeline object");
      timeline = j;
      timeline_line = line;
    } else {
      throw ParseError(line, "type", "unknown record type '" + type + "'");
    }
  }
  if (!timeline) throw ParseError(0, "timeline", "no timeline object");

  LineReader tr(*timeline, timeline_line);
  scenario.name = tr.GetOr<std::string>("name", "");
  scenario.seed = tr.GetOr<std::uint64_t>("seed", 0);
  if (options.seed) scenario.seed = *options.seed;
  if (tr.Has("device")) {
    const json& dev = tr.Raw("device");
    if (dev.is_string()) {
      const std::string name = dev.get<std::string>();
      auto path = FindConfig(name, base_dir, options);
      if (!path) {
        throw ReferenceError("line " + std::to_string(timeline_line) +
                             ": device config '" + name + "' not found");
      }
      scenario.device = LoadDeviceConfig(*path);
    } else {
      try {
        scenario.device = DeviceConfigFromJson(dev);
      } catch (const ConfigError& e) {
        throw ParseError(timeline_line, "device", e.what());
      }
    }
  }

  std::unordered_set<std::string> ids;
  for (auto& [app_line, entry] : apps) {
    LaunchProfile profile;
    if (auto* g = std::get_if<PendingGenerate>(&entry)) {
      profile = GenerateProfile(Mix64(scenario.seed ^ Mix64(g->seed_offset)),
                                g->app_class);
      profile.app_id = g->app_id;
    } else {
      profile = std::move(std::get<LaunchProfile>(entry));
    }
    if (!ids.insert(profile.app_id).second) {
      throw ParseError(app_line, "app_id", "duplicate app " + profile.app_id);
    }
    scenario.apps.push_back(std::move(profile));
  }

  const json& events = tr.Raw("events");
  if (!events.is_array()) throw ParseError(timeline_line, "events", "expected array");
  for (const json& e : events) {
    if (!e.is_object()) throw ParseError(timeline_line, "events", "expected objects");
    LineReader er(e, timeline_line);
    TimelineEntry entry;
    const double t_ms = er.Get<double>("t_ms");
    if (!(t_ms >= 0.0)) throw ParseError(timeline_line, "t_ms", "must be >= 0");
    entry.time_us = std::llround(t_ms * kMicrosPerMilli);
    entry.action = ParseAction(er.Get<std::string>("action"), timeline_line);
    entry.app_id = er.Get<std::string>("app");
    if (!ids.contains(entry.app_id)) {
      throw ReferenceError("line " + std::to_string(timeline_line) +
                           ": timeline names unknown app '" + entry.app_id +
                           "'");
    }
    scenario.timeline.push_back(std::move(entry));
  }
  std::stable_sort(scenario.timeline.begin(), scenario.timeline.end(),
                   [](const TimelineEntry& a, const TimelineEntry& b) {
                     return a.time_us < b.time_us;
                   });
  return scenario;
}

Scenario ParseScenario(const std::filesystem::path& path,
                       const ScenarioOptions& options) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "", "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  Scenario s = ParseScenarioText(buf.str(), path.parent_path(), options);
  if (s.name.empty()) s.name = path.stem().string();
  return s;
}

std::vector<LaunchProfile> ParseProfiles(const std::filesystem::path& path,
                                         std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "", "cannot open " + path.string());
  std::vector<LaunchProfile> out;
  std::unordered_set<std::string> ids;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto first = raw.find_first_not_of(" \t\r");
    if (first == std::string::npos || raw[first] == '#') continue;
    json j;
    try {
      j = json::parse(raw);
    } catch (const json::exception& e) {
      throw ParseError(line, "", std::string("invalid JSON: ") + e.what());
    }
    LineReader r(j, line);
    const std::string type = r.GetOr<std::string>("type", "profile");
    LaunchProfile p;
    if (type == "profile") {
      p = ProfileFromLine(j, line);
    } else if (type == "generate") {
      const auto cls = ParseAppClass(r.Get<std::string>("class"));
      p = GenerateProfile(
          Mix64(seed ^ Mix64(r.GetOr<std::uint64_t>("seed_offset", 0))), cls);
      p.app_id = r.Get<std::string>("app_id");
    } else if (type == "timeline") {
      continue;
    } else {
      throw ParseError(line, "type", "unknown record type '" + type + "'");
    }
    if (!ids.insert(p.app_id).second) {
      throw ParseError(line, "app_id", "duplicate app " + p.app_id);
    }
    out.push_back(std::move(p));
  }
  return out;
}

double ProfileStats::CountRatio() const {
  return large_count == 0 ? 0.0
                          : static_cast<double>(small_count) /
                                static_cast<double>(large_count);
}

double ProfileStats::ByteRatio() const {
  return large_bytes == 0 ? 0.0
                          : static_cast<double>(small_bytes) /
                                static_cast<double>(large_bytes);
}

ProfileStats ComputeProfileStats(const LaunchProfile& profile, Bytes cutoff) {
  ProfileStats stats;
  for (const auto& f : profile.files) {
    if (f.size < cutoff) {
      ++stats.small_count;
      stats.small_bytes += f.size;
    } else {
      ++stats.large_count;
      stats.large_bytes += f.size;
    }
  }
  return stats;
}

}  // namespace launchsim
