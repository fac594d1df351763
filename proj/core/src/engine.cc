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

#include "launchsim/engine.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <map>
#include <queue>
#include <string>

#include <nlohmann/json.hpp>

#include "launchsim/error.h"
#include "launchsim/preloader.h"

namespace launchsim {

Policy Policy::For(PolicyKind kind) {
  Policy p;
  p.kind = kind;
  switch (kind) {
    case PolicyKind::kBaseline:
      break;
    case PolicyKind::kPreloadOnly:
      p.preload = true;
      break;
    case PolicyKind::kReclaimOnly:
      p.adaptive_reclaim = true;
      p.context_killer = true;
      break;
    case PolicyKind::kNaiveCombined:
      p.preload = true;
      p.adaptive_reclaim = true;
      break;
    case PolicyKind::kAppFlow:
      p.preload = true;
      p.adaptive_reclaim = true;
      p.context_killer = true;
      p.retention = true;
      break;
  }
  return p;
}

const char* PolicyName(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kBaseline:
      return "baseline";
    case PolicyKind::kPreloadOnly:
      return "preload-only";
    case PolicyKind::kReclaimOnly:
      return "reclaim-only";
    case PolicyKind::kNaiveCombined:
      return "naive-combined";
    case PolicyKind::kAppFlow:
      return "appflow";
  }
  return "?";
}

std::optional<PolicyKind> ParsePolicy(std::string_view name) {
  std::string norm;
  for (char c : name) {
    if (c == '_' || c == '-' || c == ' ') continue;
    norm.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  for (PolicyKind k : AllPolicies()) {
    std::string candidate;
    for (const char* p = PolicyName(k); *p != '\0'; ++p) {
      if (*p != '-') candidate.push_back(*p);
    }
    if (candidate == norm) return k;
  }
  return std::nullopt;
}

std::vector<PolicyKind> AllPolicies() {
  return {PolicyKind::kBaseline, PolicyKind::kPreloadOnly,
          PolicyKind::kReclaimOnly, PolicyKind::kNaiveCombined,
          PolicyKind::kAppFlow};
}

const char* EventKindName(EventKind kind) {
  switch (kind) {
    case EventKind::kLaunchRequest:
      return "launch_request";
    case EventKind::kSwitchRequest:
      return "switch_request";
    case EventKind::kBackgroundRequest:
      return "background_request";
    case EventKind::kIoProgress:
      return "io_progress";
    case EventKind::kCpuDone:
      return "cpu_done";
    case EventKind::kAllocBurst:
      return "alloc_burst";
    case EventKind::kReclaimStep:
      return "reclaim_step";
    case EventKind::kReclaimTick:
      return "reclaim_tick";
    case EventKind::kScanTick:
      return "scan_tick";
    case EventKind::kLaunchComplete:
      return "launch_complete";
  }
  return "?";
}

namespace {

using nlohmann::json;

enum class AppState { kDead, kLaunching, kForeground, kBackground };

enum class StreamKind {
  kForegroundRead,
  kSwapIn,
  kDirectReclaimWrite,
  kKswapdWrite,
  kPreloadBefore,
  kPreloadDuring,
};

const char* StreamKindName(StreamKind k) {
  switch (k) {
    case StreamKind::kForegroundRead:
      return "fg_read";
    case StreamKind::kSwapIn:
      return "swap_in";
    case StreamKind::kDirectReclaimWrite:
      return "dr_write";
    case StreamKind::kKswapdWrite:
      return "kswapd_write";
    case StreamKind::kPreloadBefore:
      return "preload_before";
    case StreamKind::kPreloadDuring:
      return "preload_during";
  }
  return "?";
}

// Reclaim source ids encode the app and the page pool.
enum SourcePool : std::int64_t {
  kPoolPreload = 0,
  kPoolFile = 1,
  kPoolAnon = 2,
};
constexpr std::int64_t kPools = 3;

std::int64_t SourceId(std::size_t app, SourcePool pool) {
  return static_cast<std::int64_t>(app) * kPools + pool;
}

struct App {
  const LaunchProfile* profile = nullptr;
  AppState state = AppState::kDead;
  bool launched_before = false;
  Micros last_used = 0;
  Bytes file_dropped = 0;   // resident file bytes reclaimed since launch
  Bytes swapped = 0;        // anonymous bytes sitting in swap
  Bytes pending_swap_out = 0;
  Bytes growth_done = 0;
  Micros bg_time = 0;
  Micros cpu_total = 0;
  std::size_t cpu_phases = 0;

  std::vector<Bytes> loaded;               // preloaded bytes per phase
  std::map<std::uint64_t, std::size_t> chunks;  // load order -> phase
  std::vector<std::uint64_t> chunk_key;    // phase -> load order, 0 = none
  Bytes chunk_bytes = 0;
  Bytes inflight_preload = 0;
  std::vector<char> queued;                // before-launch job pending
  bool has_plan = false;
};

struct Stream {
  StreamKind kind = StreamKind::kForegroundRead;
  IoRequest request;
  double remaining = 0.0;
  double rate = 0.0;
  Micros last = 0;
  std::uint64_t version = 0;
  std::size_t app = 0;
  std::size_t phase = 0;
  Bytes bytes = 0;
};

struct Event {
  Micros time = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::kReclaimTick;
  std::int64_t a = 0;
  std::uint64_t b = 0;
};

struct EventAfter {
  bool operator()(const Event& x, const Event& y) const {
    if (x.time != y.time) return x.time > y.time;
    return x.seq > y.seq;
  }
};

enum class LaunchStep {
  kStart,
  kAllocating,
  kCpu,
  kIo,
  kHotRefault,
  kHotSwapIn,
  kHotCpu,
  kDone,
};

struct Launch {
  std::size_t app = 0;
  LaunchKind kind = LaunchKind::kCold;
  bool relaunch = false;
  Micros start = 0;
  Micros t_io = 0;
  Micros t_cpu = 0;
  Micros t_alloc = 0;
  Micros stall = 0;   // blocked time since the last kill
  std::size_t phase = 0;
  bool phase_allocated = false;
  bool phase_started = false;
  bool upfront_done = false;
  Bytes io_need = 0;
  Bytes anon_left = 0;
  std::size_t cpu_left = 0;
  Micros step_since = 0;
  bool background_after = false;
  // Allocation waiting on reclaim.
  Bytes want_file = 0;
  Bytes want_anon = 0;
  bool blocked = false;
  Micros blocked_since = 0;
  // Hot relaunch.
  int hot_step = 0;
  Bytes refault_file = 0;
  Bytes swap_in = 0;
};

struct ReclaimRun {
  double file_elapsed_ms = 0.0;
  Bytes freed_file = 0;
  Bytes anon_bytes = 0;
  Bytes shortfall = 0;
  std::vector<ReclaimTake> anon_takes;
};

struct DirectReclaimState {
  bool active = false;
  Micros round_start = 0;
  ReclaimRun run;
  bool progress = false;
  std::uint64_t token = 0;
};

struct KswapdState {
  bool awake = false;
  bool busy = false;
  std::vector<ReclaimTake> anon_takes;
  std::uint64_t token = 0;
};

struct DuringStream {
  std::size_t app = 0;
  std::vector<std::size_t> phases;
  std::size_t next = 0;
  std::optional<std::int64_t> stream;
};

struct BeforeJob {
  std::size_t app = 0;
  std::size_t phase = 0;
};

class Engine {
 public:
  Engine(const Scenario& scenario, PolicyKind kind,
         const SimulationOptions& options)
      : sc_(scenario),
        dev_(scenario.device),
        policy_(Policy::For(kind)),
        opt_(options),
        io_(scenario.device),
        min_wm_(dev_.MinWatermark()),
        low_wm_(dev_.LowWatermark()),
        high_wm_(dev_.HighWatermark()),
        meter_(MillisToMicros(dev_.reclaim_tick_ms)),
        scanner_(MillisToMicros(dev_.tuning.scan_interval_ms),
                 MillisToMicros(dev_.tuning.scan_cost_ms)) {
    dev_.Validate();
    report_.scenario = sc_.name;
    report_.policy = PolicyName(kind);
    report_.seed = sc_.seed;
    report_.throughput_bucket_ms = dev_.tuning.throughput_bucket_ms;
  }

  MetricsReport Run();

 private:
  // Events.
  void Schedule(Micros at, EventKind kind, std::int64_t a = 0,
                std::uint64_t b = 0) {
    queue_.push({at, seq_++, kind, a, b});
  }
  void Dispatch(const Event& e);
  bool Finished() const {
    return timeline_done_ == sc_.timeline.size() && !launch_ &&
           pending_.empty();
  }

  // Streams.
  std::int64_t AddStream(StreamKind kind, IoRequest request, std::size_t app,
                         std::size_t phase, Bytes bytes);
  void RemoveStream(std::int64_t id);
  void AdvanceStreams();
  void RecomputeRates();
  void OnStreamDone(std::int64_t id, std::uint64_t version);
  double SnapshotWriteRate() const;

  // Launches.
  void RequestLaunch(std::size_t app);
  void StartLaunch(std::size_t app);
  void Continue();
  void ContinueCold();
  void ContinueHot();
  bool Allocate(Bytes file, Bytes anon);
  void Commit(std::size_t app, Bytes file, Bytes anon);
  void CompleteLaunch();
  void FailLaunch();
  void FinishLaunch(bool failed);
  void MoveToBackground(std::size_t app);
  Bytes ConsumePreloaded(std::size_t app, std::size_t phase);

  // Reclaim and kill.
  ReclaimRun RunReclaim(Bytes demand, bool direct, double budget_ms);
  void BuildSources(std::vector<ReclaimSource>* file,
                    std::vector<ReclaimSource>* anon) const;
  void ApplyFileTake(const ReclaimTake& t);
  void ApplyAnonTakes(const std::vector<ReclaimTake>& takes);
  void StartDirectReclaim();
  void DirectReclaimFileDone();
  void FinishDirectReclaim();
  void KswapdPoke();
  void KswapdStep();
  Bytes Owed() const;
  Bytes RunKiller(Bytes demand);
  void Kill(std::size_t app);
  void NoteAlloc(Bytes bytes) { meter_.RecordAlloc(now_, PagesFor(bytes)); }

  // Preloading.
  void PlanPreloads();
  void TopUpBeforeLaunch();
  void StartNextBefore();
  void TryDuringNext();
  void CancelPreloadStream(std::int64_t id);
  void AddChunk(std::size_t app, std::size_t phase, Bytes bytes);
  Bytes EvictPreload(std::size_t app, Bytes bytes);
  void DropChunks(std::size_t app);
  void TouchChunks();

  // Ticks.
  void OnReclaimTick();
  void OnScanTick();
  void GrowBackground(Micros dt);

  void CheckInvariants();
  void Log(json j);
  bool Sensitive() const {
    return IsMemorySensitive(mem_.free, alloc_rate_, dev_);
  }

  const Scenario& sc_;
  const DeviceConfig& dev_;
  Policy policy_;
  SimulationOptions opt_;
  IoModel io_;
  Bytes min_wm_;
  Bytes low_wm_;
  Bytes high_wm_;

  Micros now_ = 0;
  std::uint64_t seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::size_t timeline_done_ = 0;

  MemoryState mem_;
  std::vector<App> apps_;
  std::optional<std::size_t> foreground_;

  std::map<std::int64_t, Stream> streams_;
  std::int64_t next_stream_ = 1;

  std::optional<Launch> launch_;
  std::deque<std::size_t> pending_;

  CutoffPlan plan_;
  ProtectionRegistry registry_;
  std::uint64_t chunk_order_ = 1;
  std::deque<BeforeJob> before_queue_;
  std::optional<std::int64_t> before_stream_;
  std::optional<DuringStream> during_;

  AllocMeter meter_;
  std::int64_t alloc_rate_ = 0;
  EpisodeBalance episode_;
  Bytes pending_swap_ = 0;
  KswapdState ks_;
  DirectReclaimState dr_;
  TouchScanner scanner_;

  MetricsReport report_;
  std::vector<double> bucket_bytes_;
};

// ---------------------------------------------------------------- streams

std::int64_t Engine::AddStream(StreamKind kind, IoRequest request,
                               std::size_t app, std::size_t phase,
                               Bytes bytes) {
  AdvanceStreams();
  const std::int64_t id = next_stream_++;
  request.stream_id = id;
  Stream s;
  s.kind = kind;
  s.request = request;
  s.remaining = static_cast<double>(request.bytes_remaining);
  s.last = now_;
  s.app = app;
  s.phase = phase;
  s.bytes = bytes;
  streams_.emplace(id, s);
  RecomputeRates();
  if (opt_.event_log != nullptr) {
    Log({{"event", "stream_start"},
         {"stream", id},
         {"kind", StreamKindName(kind)},
         {"app", sc_.apps[app].app_id},
         {"bytes", request.bytes_remaining},
         {"block", request.block_size}});
  }
  return id;
}

void Engine::RemoveStream(std::int64_t id) {
  AdvanceStreams();
  streams_.erase(id);
  RecomputeRates();
}

void Engine::AdvanceStreams() {
  const auto bucket_us = MillisToMicros(dev_.tuning.throughput_bucket_ms);
  for (auto& [id, s] : streams_) {
    if (now_ > s.last && s.rate > 0.0) {
      const double moved = std::min(
          s.remaining, s.rate * static_cast<double>(now_ - s.last) / 1e6);
      s.remaining -= moved;
      // Spread the bytes over the buckets the interval covers.
      Micros t = s.last;
      while (t < now_) {
        const auto b = static_cast<std::size_t>(t / bucket_us);
        const Micros end = std::min(now_, static_cast<Micros>(b + 1) * bucket_us);
        if (bucket_bytes_.size() <= b) bucket_bytes_.resize(b + 1, 0.0);
        bucket_bytes_[b] += moved * static_cast<double>(end - t) /
                            static_cast<double>(now_ - s.last);
        t = end;
      }
    }
    s.last = now_;
  }
}

void Engine::RecomputeRates() {
  std::vector<IoRequest> requests;
  requests.reserve(streams_.size());
  for (const auto& [id, s] : streams_) requests.push_back(s.request);
  const std::vector<StreamRate> rates = io_.ContentionSplit(requests);
  std::size_t i = 0;
  for (auto& [id, s] : streams_) {
    const double rate = rates[i++].bytes_per_sec;
    if (rate == s.rate && s.version != 0) continue;
    s.rate = rate;
    ++s.version;
    if (rate > 0.0) {
      const auto dt = static_cast<Micros>(
          std::ceil(std::max(0.0, s.remaining) / rate * 1e6));
      Schedule(now_ + dt, EventKind::kIoProgress, id, s.version);
    }
  }
}

double Engine::SnapshotWriteRate() const {
  std::size_t fg = 1;
  for (const auto& [id, s] : streams_) {
    if (s.request.priority == IoPriority::kForeground) ++fg;
  }
  IoRequest w;
  w.block_size = dev_.tuning.swap_block;
  w.direction = IoDirection::kWrite;
  return io_.SoloRate(w) / static_cast<double>(fg);
}

void Engine::OnStreamDone(std::int64_t id, std::uint64_t version) {
  auto it = streams_.find(id);
  if (it == streams_.end() || it->second.version != version) return;
  const Stream s = it->second;
  RemoveStream(id);
  if (opt_.event_log != nullptr) {
    Log({{"event", "stream_done"},
         {"stream", id},
         {"kind", StreamKindName(s.kind)},
         {"app", sc_.apps[s.app].app_id}});
  }
  switch (s.kind) {
    case StreamKind::kForegroundRead:
    case StreamKind::kSwapIn: {
      Launch& l = *launch_;
      l.t_io += now_ - l.step_since;
      if (s.kind == StreamKind::kSwapIn) {
        App& a = apps_[l.app];
        mem_.swap_used -= s.bytes;
        a.swapped -= s.bytes;
      }
      if (l.kind == LaunchKind::kHot) {
        ++l.hot_step;
      } else {
        ++l.phase;
        l.phase_allocated = false;
        l.phase_started = false;
      }
      Continue();
      break;
    }
    case StreamKind::kDirectReclaimWrite:
      ApplyAnonTakes(dr_.run.anon_takes);
      dr_.run.anon_takes.clear();
      FinishDirectReclaim();
      break;
    case StreamKind::kKswapdWrite:
      ApplyAnonTakes(ks_.anon_takes);
      ks_.anon_takes.clear();
      ks_.busy = false;
      KswapdStep();
      break;
    case StreamKind::kPreloadBefore: {
      before_stream_.reset();
      App& a = apps_[s.app];
      a.inflight_preload -= s.bytes;
      a.queued[s.phase] = 0;
      AddChunk(s.app, s.phase, s.bytes);
      StartNextBefore();
      break;
    }
    case StreamKind::kPreloadDuring: {
      App& a = apps_[s.app];
      a.inflight_preload -= s.bytes;
      AddChunk(s.app, s.phase, s.bytes);
      if (during_ && during_->stream == id) {
        during_->stream.reset();
        ++during_->next;
        TryDuringNext();
      }
      break;
    }
  }
}

// ---------------------------------------------------------------- preload

void Engine::PlanPreloads() {
  plan_ = PlanCutoffs(sc_.apps, dev_.preload_budget, io_.BlockSizes(), io_,
                      dev_.tuning.plan_quantum);
  for (auto& a : apps_) a.has_plan = true;
  if (opt_.event_log != nullptr) {
    json apps = json::array();
    for (const auto& c : plan_.apps) {
      apps.push_back({{"app", c.app_id},
                      {"cutoff", c.chosen.cutoff},
                      {"preload", c.chosen.preload_size}});
    }
    Log({{"event", "plan"},
         {"total_preload", plan_.total_preload},
         {"budget_exceeded", plan_.budget_exceeded},
         {"apps", apps}});
  }
}

void Engine::TopUpBeforeLaunch() {
  if (!policy_.preload) return;
  for (std::size_t i = 0; i < apps_.size(); ++i) {
    App& a = apps_[i];
    if (a.state != AppState::kDead || !a.has_plan) continue;
    const std::vector<PreloadJob> jobs =
        BeforeLaunchJobs(*a.profile, plan_, io_, registry_);
    for (const auto& job : jobs) {
      if (a.queued[job.phase_index] || a.loaded[job.phase_index] > 0) continue;
      a.queued[job.phase_index] = 1;
      before_queue_.push_back({i, job.phase_index});
    }
  }
  StartNextBefore();
}

void Engine::StartNextBefore() {
  while (!before_stream_ && !before_queue_.empty()) {
    const BeforeJob job = before_queue_.front();
    App& a = apps_[job.app];
    const auto& phase = std::get<IoPhase>(a.profile->phases[job.phase]);
    if (a.state != AppState::kDead || a.loaded[job.phase] >= phase.length) {
      a.queued[job.phase] = 0;
      before_queue_.pop_front();
      continue;
    }
    const Bytes bytes = phase.length - a.loaded[job.phase];
    if (mem_.free - bytes < low_wm_) return;  // deferred to a later tick
    before_queue_.pop_front();
    mem_.free -= bytes;
    mem_.preloaded[job.app] += bytes;
    a.inflight_preload += bytes;
    NoteAlloc(bytes);
    IoRequest r;
    r.bytes_remaining = bytes;
    r.block_size = io_.min_block();
    r.priority = IoPriority::kLowPriority;
    r.direction = IoDirection::kRead;
    before_stream_ = AddStream(StreamKind::kPreloadBefore, r, job.app,
                               job.phase, bytes);
    KswapdPoke();
  }
}

void Engine::TryDuringNext() {
  if (!during_ || during_->stream || !launch_) return;
  DuringStream& d = *during_;
  App& a = apps_[d.app];
  const Launch& l = *launch_;
  while (d.next < d.phases.size()) {
    const std::size_t k = d.phases[d.next];
    const auto& phase = std::get<IoPhase>(a.profile->phases[k]);
    if (k < l.phase || (k == l.phase && l.phase_allocated) ||
        a.loaded[k] >= phase.length) {
      ++d.next;
      continue;
    }
    const Bytes bytes = phase.length - a.loaded[k];
    if (mem_.free - bytes < low_wm_) return;  // paused until memory frees
    mem_.free -= bytes;
    mem_.preloaded[d.app] += bytes;
    a.inflight_preload += bytes;
    NoteAlloc(bytes);
    IoRequest r;
    r.bytes_remaining = bytes;
    r.block_size = io_.BlockFor(bytes, io_.max_block());
    r.priority = IoPriority::kLowPriority;
    r.direction = IoDirection::kRead;
    d.stream = AddStream(StreamKind::kPreloadDuring, r, d.app, k, bytes);
    KswapdPoke();
    return;
  }
}

void Engine::CancelPreloadStream(std::int64_t id) {
  auto it = streams_.find(id);
  if (it == streams_.end()) return;
  const Stream s = it->second;
  RemoveStream(id);
  App& a = apps_[s.app];
  a.inflight_preload -= s.bytes;
  mem_.preloaded[s.app] -= s.bytes;
  mem_.free += s.bytes;
  if (s.kind == StreamKind::kPreloadBefore) {
    a.queued[s.phase] = 0;
    before_stream_.reset();
  }
}

void Engine::AddChunk(std::size_t app, std::size_t phase, Bytes bytes) {
  App& a = apps_[app];
  if (a.chunk_key[phase] != 0) a.chunks.erase(a.chunk_key[phase]);
  a.chunk_key[phase] = chunk_order_++;
  a.chunks.emplace(a.chunk_key[phase], phase);
  a.loaded[phase] += bytes;
  a.chunk_bytes += bytes;
}

Bytes Engine::EvictPreload(std::size_t app, Bytes bytes) {
  App& a = apps_[app];
  Bytes done = 0;
  while (done < bytes && !a.chunks.empty()) {
    auto it = a.chunks.begin();
    const std::size_t phase = it->second;
    const Bytes n = std::min(bytes - done, a.loaded[phase]);
    a.loaded[phase] -= n;
    a.chunk_bytes -= n;
    done += n;
    if (a.loaded[phase] == 0) {
      a.chunk_key[phase] = 0;
      a.chunks.erase(it);
    }
  }
  mem_.preloaded[app] -= done;
  mem_.free += done;
  return done;
}

void Engine::DropChunks(std::size_t app) {
  App& a = apps_[app];
  EvictPreload(app, a.chunk_bytes);
}

Bytes Engine::ConsumePreloaded(std::size_t app, std::size_t phase) {
  App& a = apps_[app];
  const Bytes n = a.loaded[phase];
  if (n == 0) return 0;
  a.chunks.erase(a.chunk_key[phase]);
  a.chunk_key[phase] = 0;
  a.loaded[phase] = 0;
  a.chunk_bytes -= n;
  mem_.preloaded[app] -= n;
  mem_.resident[app].file_backed += n;
  return n;
}

void Engine::TouchChunks() {
  for (std::size_t i = 0; i < apps_.size(); ++i) {
    App& a = apps_[i];
    if (a.chunks.empty() ||
        registry_.PhaseOf(a.profile->app_id) != ProtectionPhase::kBeforeLaunch) {
      continue;
    }
    std::map<std::uint64_t, std::size_t> fresh;
    for (const auto& [key, phase] : a.chunks) {
      a.chunk_key[phase] = chunk_order_;
      fresh.emplace(chunk_order_++, phase);
    }
    a.chunks.swap(fresh);
  }
}

// ---------------------------------------------------------------- reclaim

void Engine::BuildSources(std::vector<ReclaimSource>* file,
                          std::vector<ReclaimSource>* anon) const {
  // Preloaded pages sit on the inactive list: oldest load first.
  std::vector<std::pair<std::uint64_t, std::size_t>> preload_order;
  std::vector<std::pair<Micros, std::size_t>> lru;
  for (std::size_t i = 0; i < apps_.size(); ++i) {
    const App& a = apps_[i];
    if (!a.chunks.empty()) preload_order.emplace_back(a.chunks.begin()->first, i);
    if (a.state == AppState::kBackground) lru.emplace_back(a.last_used, i);
  }
  std::sort(preload_order.begin(), preload_order.end());
  std::sort(lru.begin(), lru.end());
  for (const auto& [order, i] : preload_order) {
    file->push_back({SourceId(i, kPoolPreload), apps_[i].chunk_bytes,
                     registry_.IsActive(apps_[i].profile->app_id)});
  }
  for (const auto& [t, i] : lru) {
    const Residency& r = mem_.resident[i];
    if (r.file_backed > 0) {
      file->push_back({SourceId(i, kPoolFile), r.file_backed, false});
    }
    const Bytes anon_avail = r.anonymous - apps_[i].pending_swap_out;
    if (anon_avail > 0) anon->push_back({SourceId(i, kPoolAnon), anon_avail, false});
  }
}

void Engine::ApplyFileTake(const ReclaimTake& t) {
  const auto app = static_cast<std::size_t>(t.source_id / kPools);
  const auto pool = static_cast<SourcePool>(t.source_id % kPools);
  if (pool == kPoolPreload) {
    const Bytes n = EvictPreload(app, t.bytes);
    report_.preload_evicted += n;
    if (t.was_protected) report_.protected_evicted += n;
  } else {
    Residency& r = mem_.resident[app];
    const Bytes n = std::min(t.bytes, r.file_backed);
    r.file_backed -= n;
    apps_[app].file_dropped += n;
    mem_.free += n;
  }
}

void Engine::ApplyAnonTakes(const std::vector<ReclaimTake>& takes) {
  for (const auto& t : takes) {
    const auto app = static_cast<std::size_t>(t.source_id / kPools);
    App& a = apps_[app];
    pending_swap_ -= t.bytes;
    a.pending_swap_out = std::max<Bytes>(0, a.pending_swap_out - t.bytes);
    Residency& r = mem_.resident[app];
    const Bytes n = std::min({t.bytes, r.anonymous,
                              dev_.SwapLimit() - mem_.swap_used});
    if (n <= 0) continue;
    r.anonymous -= n;
    a.swapped += n;
    mem_.swap_used += n;
    mem_.free += n;
  }
}

Bytes Engine::Owed() const {
  const Bytes owed = episode_.file_freed - episode_.anon_freed;
  return std::max<Bytes>(0, owed);
}

ReclaimRun Engine::RunReclaim(Bytes demand, bool direct, double budget_ms) {
  ReclaimRun run;
  ReclaimMode mode = ReclaimMode::kDefault;
  if (policy_.adaptive_reclaim) {
    mode = SelectMode(Sensitive(), episode_, 1.0, dev_.tuning.reclaim_batch);
    // Rebalancing waits for the episode to end.
    if (mode == ReclaimMode::kRebalancing && launch_) mode = ReclaimMode::kDefault;
  }
  for (int round = 0; round < 2 && demand > 0; ++round) {
    std::vector<ReclaimSource> file;
    std::vector<ReclaimSource> anon;
    BuildSources(&file, &anon);
    ReclaimRequest req;
    req.demand = demand;
    req.mode = mode;
    req.file_sources = file;
    req.anon_sources = anon;
    req.honor_protection = policy_.retention;
    req.direct = direct;
    req.swap_room = std::max<Bytes>(
        0, dev_.SwapLimit() - mem_.swap_used - pending_swap_);
    req.anon_write_bps = SnapshotWriteRate();
    req.file_drop_bytes_per_ms = dev_.tuning.file_drop_bytes_per_ms;
    req.batch = dev_.tuning.reclaim_batch;
    req.time_budget_ms = budget_ms - run.file_elapsed_ms;
    req.episode = episode_;
    const ReclaimOutcome out = Reclaim(req);

    ++report_.reclaim_calls;
    switch (out.mode) {
      case ReclaimMode::kEfficiencyFirst:
        ++report_.efficiency_first_calls;
        report_.efficiency_first_io_write += out.io_write_bytes;
        report_.efficiency_first_anon_freed += out.freed_anon;
        break;
      case ReclaimMode::kRebalancing:
        ++report_.rebalancing_calls;
        break;
      case ReclaimMode::kDefault:
        ++report_.default_calls;
        break;
    }
    report_.protected_skips += static_cast<std::int64_t>(out.marked_active.size());
    report_.reclaimed_file += out.freed_file;
    report_.reclaimed_anon += out.freed_anon;
    if (opt_.observer != nullptr) opt_.observer->OnReclaim(now_, out);
    if (opt_.event_log != nullptr) {
      Log({{"event", "reclaim"},
           {"mode", ReclaimModeName(out.mode)},
           {"direct", direct},
           {"demand", demand},
           {"freed_file", out.freed_file},
           {"freed_anon", out.freed_anon},
           {"io_write", out.io_write_bytes},
           {"elapsed_ms", RoundMillis(out.elapsed_ms)},
           {"shortfall", out.shortfall}});
    }

    for (const auto& t : out.takes) {
      if (t.kind == PageKind::kFileBacked) {
        ApplyFileTake(t);
      } else {
        apps_[static_cast<std::size_t>(t.source_id / kPools)].pending_swap_out +=
            t.bytes;
        pending_swap_ += t.bytes;
        run.anon_takes.push_back(t);
      }
    }
    episode_.file_freed += out.freed_file;
    episode_.anon_freed += out.freed_anon;
    run.freed_file += out.freed_file;
    run.anon_bytes += out.freed_anon;
    run.file_elapsed_ms += static_cast<double>(out.freed_file) /
                           static_cast<double>(dev_.tuning.file_drop_bytes_per_ms);
    run.shortfall = out.shortfall;
    demand = out.shortfall;
    // Efficiency-first never writes; escalate to default for the rest.
    if (mode != ReclaimMode::kEfficiencyFirst) break;
    mode = ReclaimMode::kDefault;
  }
  return run;
}

void Engine::StartDirectReclaim() {
  Launch& l = *launch_;
  dr_.active = true;
  dr_.round_start = now_;
  const Bytes want = l.want_file + l.want_anon;
  const Bytes demand =
      std::max(dev_.tuning.reclaim_batch, want + min_wm_ - mem_.free);
  const double budget_ms =
      std::max(0.0, static_cast<double>(dev_.tuning.direct_reclaim_budget_ms) -
                        MicrosToMillis(l.stall));
  dr_.run = RunReclaim(demand, /*direct=*/true, budget_ms);
  dr_.progress = dr_.run.freed_file > 0 || dr_.run.anon_bytes > 0;
  const auto delay = static_cast<Micros>(std::ceil(dr_.run.file_elapsed_ms * 1000.0));
  Schedule(now_ + delay, EventKind::kReclaimStep, 0, ++dr_.token);
}

void Engine::DirectReclaimFileDone() {
  if (dr_.run.anon_bytes > 0) {
    IoRequest w;
    w.bytes_remaining = dr_.run.anon_bytes;
    w.block_size = dev_.tuning.swap_block;
    w.priority = IoPriority::kForeground;
    w.direction = IoDirection::kWrite;
    AddStream(StreamKind::kDirectReclaimWrite, w, launch_->app, 0,
              dr_.run.anon_bytes);
    return;
  }
  FinishDirectReclaim();
}

void Engine::FinishDirectReclaim() {
  Launch& l = *launch_;
  dr_.active = false;
  l.stall += now_ - dr_.round_start;
  const Bytes want = l.want_file + l.want_anon;
  bool killed = false;
  if (dr_.run.shortfall > 0 &&
      (l.stall >= MillisToMicros(dev_.tuning.direct_reclaim_budget_ms) ||
       !dr_.progress)) {
    const Bytes need = std::max<Bytes>(0, low_wm_ + want - mem_.free);
    const auto demand = static_cast<Bytes>(
        std::ceil(static_cast<double>(need) * (1.0 + dev_.tuning.kill_headroom)));
    killed = RunKiller(demand) > 0;
    l.stall = 0;
  }
  // Retry the blocked allocation.
  if (mem_.free - want >= min_wm_ ||
      (!dr_.progress && !killed && mem_.free >= want)) {
    l.t_alloc += now_ - l.blocked_since;
    l.blocked = false;
    Commit(l.app, l.want_file, l.want_anon);
    KswapdPoke();
    Continue();
    return;
  }
  if (dr_.progress || killed) {
    StartDirectReclaim();
    return;
  }
  l.t_alloc += now_ - l.blocked_since;
  FailLaunch();
}

void Engine::KswapdPoke() {
  if (!ks_.awake && mem_.free < low_wm_) ks_.awake = true;
  if (ks_.busy) return;
  KswapdStep();
}

void Engine::KswapdStep() {
  if (ks_.busy) return;
  const Bytes batch = dev_.tuning.reclaim_batch;
  Bytes target = high_wm_ - mem_.free;
  if (ks_.awake && target <= 0) ks_.awake = false;
  if (!ks_.awake) target = 0;
  const Bytes owed = policy_.adaptive_reclaim ? Owed() : 0;
  const bool rebalance = owed > batch && !launch_;
  if (!ks_.awake && !rebalance) {
    if (!dr_.active && owed <= batch) episode_ = {};
    return;
  }
  Bytes demand;
  if (!ks_.awake) {
    demand = std::min(owed, batch);
  } else if (policy_.adaptive_reclaim && Sensitive()) {
    demand = target;
  } else {
    demand = std::min(target, 2 * batch);
  }
  const ReclaimRun run =
      RunReclaim(demand, /*direct=*/false, std::numeric_limits<double>::infinity());
  if (run.freed_file == 0 && run.anon_bytes == 0) {
    // Nothing left to take; retry on the next tick.
    if (!ks_.awake) episode_ = {};
    return;
  }
  ks_.busy = true;
  if (run.anon_bytes > 0) {
    ks_.anon_takes = run.anon_takes;
    IoRequest w;
    w.bytes_remaining = run.anon_bytes;
    w.block_size = dev_.tuning.swap_block;
    w.priority = IoPriority::kLowPriority;
    w.direction = IoDirection::kWrite;
    AddStream(StreamKind::kKswapdWrite, w, 0, 0, run.anon_bytes);
  } else {
    const auto delay = std::max<Micros>(
        1, static_cast<Micros>(std::ceil(run.file_elapsed_ms * 1000.0)));
    Schedule(now_ + delay, EventKind::kReclaimStep, 1, ++ks_.token);
  }
  // Freed memory may unblock paused preloads.
  TryDuringNext();
}

Bytes Engine::RunKiller(Bytes demand) {
  std::vector<KillCandidate> candidates;
  for (std::size_t i = 0; i < apps_.size(); ++i) {
    const App& a = apps_[i];
    // Nothing resident means nothing to gain.
    if (a.state != AppState::kBackground || mem_.resident[i].Total() == 0) continue;
    KillCandidate c;
    c.app_id = a.profile->app_id;
    c.tag = static_cast<std::int64_t>(i);
    c.current_footprint = mem_.resident[i].Total();
    c.relaunch_footprint = a.profile->baseline_footprint;
    c.last_used_us = a.last_used;
    candidates.push_back(std::move(c));
  }
  const KillDecision d =
      policy_.context_killer
          ? SelectVictims(candidates, demand, now_,
                          MillisToMicros(dev_.recency_window_ms))
          : LmkBaseline(candidates, demand);
  Bytes freed = 0;
  for (const auto& v : d.victims) {
    const auto app = static_cast<std::size_t>(v.tag);
    freed += mem_.resident[app].Total();
    ++report_.kill_count;
    report_.killed_bytes += v.footprint;
    report_.kill_net_freed += v.net_freed;
    if (opt_.observer != nullptr) opt_.observer->OnKill(now_, v);
    if (opt_.event_log != nullptr) {
      Log({{"event", "kill"},
           {"app", v.app_id},
           {"phase", v.phase == KillPhase::kStale    ? "stale"
                     : v.phase == KillPhase::kRecent ? "recent"
                                                     : "lru"},
           {"footprint", v.footprint},
           {"delta_m", v.net_freed},
           {"demand", demand}});
    }
    Kill(app);
  }
  return freed;
}

void Engine::Kill(std::size_t app) {
  App& a = apps_[app];
  Residency& r = mem_.resident[app];
  mem_.free += r.Total();
  r = Residency{};
  mem_.swap_used -= a.swapped;
  a.swapped = 0;
  a.file_dropped = 0;
  a.growth_done = 0;
  a.bg_time = 0;
  DropChunks(app);
  a.state = AppState::kDead;
  registry_.Clear(a.profile->app_id);
}

// ---------------------------------------------------------------- launches

void Engine::RequestLaunch(std::size_t app) {
  if (launch_ || !pending_.empty()) {
    pending_.push_back(app);
    return;
  }
  StartLaunch(app);
}

void Engine::MoveToBackground(std::size_t app) {
  App& a = apps_[app];
  a.state = AppState::kBackground;
  a.last_used = now_;
  if (foreground_ == app) foreground_.reset();
}

void Engine::StartLaunch(std::size_t app) {
  App& a = apps_[app];
  if (a.state == AppState::kForeground) return;
  if (foreground_ && *foreground_ != app) MoveToBackground(*foreground_);

  Launch l;
  l.app = app;
  l.start = now_;
  l.relaunch = a.launched_before;
  if (a.state == AppState::kBackground) {
    l.kind = LaunchKind::kHot;
    const double f = dev_.tuning.refault_fraction;
    l.refault_file = AlignDown(
        static_cast<Bytes>(f * static_cast<double>(a.file_dropped)), kPageSize);
    l.swap_in = AlignDown(
        static_cast<Bytes>(f * static_cast<double>(a.swapped - a.pending_swap_out)),
        kPageSize);
    l.swap_in = std::max<Bytes>(0, l.swap_in);
  } else {
    l.kind = LaunchKind::kCold;
    a.file_dropped = 0;
    a.growth_done = 0;
    a.bg_time = 0;
    l.anon_left = a.profile->AnonBytes();
    l.cpu_left = a.cpu_phases;
    // Queued before-launch work for this app is superseded by the stream.
    if (before_stream_ && streams_.at(*before_stream_).app == app) {
      CancelPreloadStream(*before_stream_);
    }
  }
  a.state = AppState::kLaunching;
  launch_ = l;
  if (opt_.event_log != nullptr) {
    Log({{"event", "launch_start"},
         {"app", a.profile->app_id},
         {"kind", LaunchKindName(l.kind)},
         {"relaunch", l.relaunch},
         {"free", mem_.free},
         {"swap_used", mem_.swap_used},
         {"preloaded", mem_.TotalPreloaded()}});
  }
  if (l.kind == LaunchKind::kCold && policy_.preload && a.has_plan) {
    const DuringLaunchJob job =
        MakeDuringLaunchJob(*a.profile, plan_, io_, a.loaded, registry_);
    during_ = DuringStream{app, job.phases, 0, std::nullopt};
  }
  Schedule(now_, EventKind::kAllocBurst);
}

bool Engine::Allocate(Bytes file, Bytes anon) {
  Launch& l = *launch_;
  const Bytes bytes = file + anon;
  if (bytes == 0 || mem_.free - bytes >= min_wm_) {
    Commit(l.app, file, anon);
    KswapdPoke();
    return true;
  }
  l.want_file = file;
  l.want_anon = anon;
  l.blocked = true;
  l.blocked_since = now_;
  ++report_.direct_reclaim_count;
  if (opt_.event_log != nullptr) {
    Log({{"event", "direct_reclaim"},
         {"app", apps_[l.app].profile->app_id},
         {"want", bytes},
         {"free", mem_.free}});
  }
  KswapdPoke();
  StartDirectReclaim();
  return false;
}

void Engine::Commit(std::size_t app, Bytes file, Bytes anon) {
  mem_.free -= file + anon;
  mem_.resident[app].file_backed += file;
  mem_.resident[app].anonymous += anon;
  NoteAlloc(file + anon);
}

void Engine::Continue() {
  if (!launch_ || launch_->blocked) return;
  if (launch_->kind == LaunchKind::kHot) {
    ContinueHot();
  } else {
    ContinueCold();
  }
}

void Engine::ContinueCold() {
  Launch& l = *launch_;
  App& a = apps_[l.app];
  const auto& phases = a.profile->phases;
  if (!l.upfront_done) {
    l.upfront_done = true;
    // No cpu phase to carry the anonymous allocation: take it up front.
    if (a.cpu_phases == 0 && l.anon_left > 0) {
      const Bytes anon = l.anon_left;
      l.anon_left = 0;
      if (!Allocate(0, anon)) return;
    }
  }
  while (l.phase < phases.size()) {
    const Phase& ph = phases[l.phase];
    if (const auto* cpu = std::get_if<CpuPhase>(&ph)) {
      if (!l.phase_allocated) {
        const Bytes anon =
            l.cpu_left <= 1
                ? l.anon_left
                : a.profile->AnonBytes() / static_cast<Bytes>(a.cpu_phases);
        l.anon_left -= anon;
        if (l.cpu_left > 0) --l.cpu_left;
        l.phase_allocated = true;
        if (!Allocate(0, anon)) return;
      }
      l.phase_started = true;
      l.step_since = now_;
      Schedule(now_ + cpu->duration_us, EventKind::kCpuDone,
               static_cast<std::int64_t>(l.app),
               static_cast<std::uint64_t>(cpu->duration_us));
      return;
    }
    const auto& io = std::get<IoPhase>(ph);
    if (!l.phase_allocated) {
      if (during_ && during_->stream &&
          streams_.at(*during_->stream).phase == l.phase) {
        CancelPreloadStream(*during_->stream);
        during_->stream.reset();
        ++during_->next;
      }
      const Bytes have = ConsumePreloaded(l.app, l.phase);
      l.io_need = std::max<Bytes>(0, io.length - have);
      l.phase_allocated = true;
      if (l.io_need > 0 && !Allocate(l.io_need, 0)) return;
    }
    if (l.io_need == 0) {
      ++l.phase;
      l.phase_allocated = false;
      l.phase_started = false;
      continue;
    }
    l.phase_started = true;
    l.step_since = now_;
    IoRequest r;
    r.bytes_remaining = l.io_need;
    r.block_size = io_.BlockFor(l.io_need, dev_.tuning.foreground_block_max);
    r.priority = IoPriority::kForeground;
    r.direction = IoDirection::kRead;
    AddStream(StreamKind::kForegroundRead, r, l.app, l.phase, l.io_need);
    TryDuringNext();
    return;
  }
  Schedule(now_, EventKind::kLaunchComplete);
}

void Engine::ContinueHot() {
  Launch& l = *launch_;
  App& a = apps_[l.app];
  for (;;) {
    switch (l.hot_step) {
      case 0:
        l.hot_step = 1;
        a.file_dropped -= l.refault_file;
        if (!Allocate(l.refault_file, l.swap_in)) return;
        break;
      case 1:
        if (l.refault_file == 0) {
          l.hot_step = 2;
          break;
        }
        {
          l.step_since = now_;
          IoRequest r;
          r.bytes_remaining = l.refault_file;
          r.block_size =
              io_.BlockFor(l.refault_file, dev_.tuning.foreground_block_max);
          r.priority = IoPriority::kForeground;
          r.direction = IoDirection::kRead;
          AddStream(StreamKind::kForegroundRead, r, l.app, 0, l.refault_file);
        }
        return;
      case 2:
        if (l.swap_in == 0) {
          l.hot_step = 3;
          break;
        }
        {
          l.step_since = now_;
          IoRequest r;
          r.bytes_remaining = l.swap_in;
          r.block_size = dev_.tuning.swap_block;
          r.priority = IoPriority::kForeground;
          r.direction = IoDirection::kRead;
          AddStream(StreamKind::kSwapIn, r, l.app, 0, l.swap_in);
        }
        return;
      case 3: {
        const auto cpu = static_cast<Micros>(std::llround(
            dev_.tuning.hot_cpu_fraction * static_cast<double>(a.cpu_total)));
        l.step_since = now_;
        Schedule(now_ + cpu, EventKind::kCpuDone,
                 static_cast<std::int64_t>(l.app), static_cast<std::uint64_t>(cpu));
        return;
      }
      default:
        Schedule(now_, EventKind::kLaunchComplete);
        return;
    }
  }
}

void Engine::FinishLaunch(bool failed) {
  const Launch l = *launch_;
  App& a = apps_[l.app];
  if (during_) {
    if (during_->stream) CancelPreloadStream(*during_->stream);
    during_.reset();
  }
  ClearProtection(a.profile->app_id, registry_);
  if (failed) {
    Kill(l.app);
  } else {
    if (l.kind == LaunchKind::kCold) {
      // Transient launch memory goes back once the app settles.
      Residency& r = mem_.resident[l.app];
      const Bytes release = std::clamp<Bytes>(
          r.Total() - a.profile->baseline_footprint, 0, r.anonymous);
      r.anonymous -= release;
      mem_.free += release;
      DropChunks(l.app);
    }
    a.launched_before = true;
    a.last_used = now_;
    if (l.background_after) {
      a.state = AppState::kBackground;
    } else {
      a.state = AppState::kForeground;
      foreground_ = l.app;
    }
  }
  LaunchRecord rec;
  rec.app_id = a.profile->app_id;
  rec.kind = l.kind;
  rec.start_us = l.start;
  rec.t_io_us = l.t_io;
  rec.t_cpu_us = l.t_cpu;
  rec.t_alloc_us = l.t_alloc;
  rec.total_us = l.t_io + l.t_cpu + l.t_alloc;
  if (opt_.check_invariants && rec.total_us != now_ - l.start) {
    throw InvariantViolation("launch of " + rec.app_id +
                             " does not decompose into io, cpu and alloc");
  }
  rec.under_1s = !failed && rec.total_us < kMicrosPerSecond;
  rec.relaunch = l.relaunch;
  rec.failed = failed;
  if (opt_.event_log != nullptr) {
    Log({{"event", failed ? "launch_failed" : "launch_done"},
         {"app", rec.app_id},
         {"kind", LaunchKindName(rec.kind)},
         {"total_ms", RoundMillis(rec.total_ms())},
         {"t_io_ms", RoundMillis(rec.t_io_ms())},
         {"t_cpu_ms", RoundMillis(rec.t_cpu_ms())},
         {"t_alloc_ms", RoundMillis(rec.t_alloc_ms())}});
  }
  if (opt_.observer != nullptr) opt_.observer->OnLaunch(rec);
  report_.records.push_back(std::move(rec));
  launch_.reset();
  while (!launch_ && !pending_.empty()) {
    const std::size_t next = pending_.front();
    pending_.pop_front();
    StartLaunch(next);
  }
}

void Engine::CompleteLaunch() {
  if (launch_) FinishLaunch(/*failed=*/false);
}

void Engine::FailLaunch() { FinishLaunch(/*failed=*/true); }

// ---------------------------------------------------------------- ticks

void Engine::GrowBackground(Micros dt) {
  const double horizon =
      static_cast<double>(MillisToMicros(dev_.tuning.growth_horizon_ms));
  for (std::size_t i = 0; i < apps_.size(); ++i) {
    App& a = apps_[i];
    if (a.state != AppState::kBackground) continue;
    a.bg_time += dt;
    const double progress = std::min(1.0, static_cast<double>(a.bg_time) / horizon);
    const double base = static_cast<double>(a.profile->baseline_footprint);
    const auto target = AlignDown(
        std::llround(progress * (dev_.tuning.growth_factor * base - base)), kPageSize);
    const Bytes delta = target - a.growth_done;
    if (delta <= 0 || mem_.free - delta < min_wm_) continue;
    Commit(i, 0, delta);
    a.growth_done += delta;
  }
}

void Engine::OnReclaimTick() {
  alloc_rate_ = meter_.SampleRate(now_);
  GrowBackground(MillisToMicros(dev_.reclaim_tick_ms));
  KswapdPoke();
  TryDuringNext();
  StartNextBefore();
  Schedule(now_ + MillisToMicros(dev_.reclaim_tick_ms), EventKind::kReclaimTick);
}

void Engine::OnScanTick() {
  if (policy_.retention) {
    const int scans = scanner_.TouchProtected(now_, registry_);
    if (scans > 0) TouchChunks();
  }
  TopUpBeforeLaunch();
  Schedule(now_ + MillisToMicros(dev_.tuning.scan_interval_ms),
           EventKind::kScanTick);
}

// ---------------------------------------------------------------- driver

void Engine::Log(json j) {
  if (opt_.event_log == nullptr) return;
  j["t_ms"] = RoundMillis(MicrosToMillis(now_));
  *opt_.event_log << j.dump() << '\n';
}

void Engine::CheckInvariants() {
  if (!opt_.check_invariants) return;
  if (auto why = CheckMemoryInvariants(dev_, mem_)) {
    throw InvariantViolation("t=" + std::to_string(now_) + "us: " + *why);
  }
  for (std::size_t i = 0; i < apps_.size(); ++i) {
    const App& a = apps_[i];
    if (mem_.preloaded[i] != a.chunk_bytes + a.inflight_preload) {
      throw InvariantViolation("t=" + std::to_string(now_) + "us: preload of " +
                               a.profile->app_id + " out of sync");
    }
  }
}

void Engine::Dispatch(const Event& e) {
  switch (e.kind) {
    case EventKind::kLaunchRequest:
    case EventKind::kSwitchRequest: {
      ++timeline_done_;
      RequestLaunch(static_cast<std::size_t>(e.a));
      break;
    }
    case EventKind::kBackgroundRequest: {
      ++timeline_done_;
      const auto app = static_cast<std::size_t>(e.a);
      if (launch_ && launch_->app == app) {
        launch_->background_after = true;
      } else if (apps_[app].state == AppState::kForeground) {
        MoveToBackground(app);
      }
      break;
    }
    case EventKind::kIoProgress:
      OnStreamDone(e.a, e.b);
      break;
    case EventKind::kCpuDone: {
      Launch& l = *launch_;
      l.t_cpu += static_cast<Micros>(e.b);
      if (l.kind == LaunchKind::kHot) {
        ++l.hot_step;
      } else {
        ++l.phase;
        l.phase_allocated = false;
        l.phase_started = false;
      }
      Continue();
      TryDuringNext();
      break;
    }
    case EventKind::kAllocBurst:
      Continue();
      TryDuringNext();
      break;
    case EventKind::kReclaimStep:
      if (e.a == 0) {
        if (dr_.active && e.b == dr_.token) DirectReclaimFileDone();
      } else if (ks_.busy && e.b == ks_.token) {
        ks_.busy = false;
        KswapdStep();
      }
      break;
    case EventKind::kReclaimTick:
      OnReclaimTick();
      break;
    case EventKind::kScanTick:
      OnScanTick();
      break;
    case EventKind::kLaunchComplete:
      CompleteLaunch();
      break;
  }
}

MetricsReport Engine::Run() {
  mem_ = MemoryState::Initial(dev_, sc_.apps.size());
  apps_.resize(sc_.apps.size());
  for (std::size_t i = 0; i < apps_.size(); ++i) {
    App& a = apps_[i];
    a.profile = &sc_.apps[i];
    const std::size_t n = a.profile->phases.size();
    a.loaded.assign(n, 0);
    a.chunk_key.assign(n, 0);
    a.queued.assign(n, 0);
    a.cpu_total = a.profile->TotalCpu();
    for (const auto& ph : a.profile->phases) {
      if (std::holds_alternative<CpuPhase>(ph)) ++a.cpu_phases;
    }
  }
  for (std::size_t i = 0; i < sc_.timeline.size(); ++i) {
    const TimelineEntry& t = sc_.timeline[i];
    const EventKind kind = t.action == TimelineAction::kLaunch
                               ? EventKind::kLaunchRequest
                           : t.action == TimelineAction::kSwitch
                               ? EventKind::kSwitchRequest
                               : EventKind::kBackgroundRequest;
    Schedule(t.time_us, kind, sc_.AppIndex(t.app_id), i);
  }
  if (!Finished()) {
    if (policy_.preload && !sc_.apps.empty()) {
      PlanPreloads();
      TopUpBeforeLaunch();
    }
    Schedule(MillisToMicros(dev_.reclaim_tick_ms), EventKind::kReclaimTick);
    Schedule(MillisToMicros(dev_.tuning.scan_interval_ms), EventKind::kScanTick);
  }
  CheckInvariants();
  while (!Finished() && !queue_.empty()) {
    const Event e = queue_.top();
    queue_.pop();
    now_ = e.time;
    if (opt_.event_log != nullptr && e.kind != EventKind::kReclaimTick) {
      Log({{"event", EventKindName(e.kind)}, {"seq", e.seq}});
    }
    Dispatch(e);
    CheckInvariants();
    report_.peak_preloaded = std::max(report_.peak_preloaded, mem_.TotalPreloaded());
    report_.peak_swap_used = std::max(report_.peak_swap_used, mem_.swap_used);
    if (opt_.observer != nullptr) opt_.observer->OnEventBoundary(now_, mem_);
  }
  AdvanceStreams();
  report_.end_time_us = now_;
  report_.summary = MetricsFromRecords(report_.records);
  report_.scan_count = scanner_.scans();
  report_.scan_cpu_ms = MicrosToMillis(scanner_.cost_us());
  const double bucket_s =
      static_cast<double>(dev_.tuning.throughput_bucket_ms) / 1000.0;
  report_.io_throughput.reserve(bucket_bytes_.size());
  for (double b : bucket_bytes_) report_.io_throughput.push_back(b / bucket_s);
  return std::move(report_);
}

}  // namespace

MetricsReport Simulate(const Scenario& scenario, PolicyKind policy,
                       const SimulationOptions& options) {
  Engine engine(scenario, policy, options);
  return engine.Run();
}

}  // namespace launchsim
