/*
 * Copyright 2026 The Codeshare Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "codeshare/harness/runner.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <filesystem>
#include <memory>
#include <set>

#include "codeshare/harness/report.h"

namespace codeshare {

namespace {

uint64_t ConfigCount(const std::string& key, const std::string& value) {
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || p != value.data() + value.size()) {
    throw ConfigError("config " + key + ": expected a non-negative integer, got '" + value + "'");
  }
  return v;
}

const char* AttachName(AttachKind kind) {
  switch (kind) {
    case AttachKind::kClaimed:
      return "claimed";
    case AttachKind::kReclaimed:
      return "reclaimed";
    case AttachKind::kPrivateFallback:
      return "private";
  }
  return "none";
}

ProcessReport Snapshot(const Process& p, const std::string& app, uint64_t wall_ns) {
  ProcessReport r;
  r.pid = p.pid();
  r.app = app;
  if (p.mode() == RunMode::kShareJit) {
    r.attach = AttachName(p.attachment().kind);
    if (p.sharing()) r.segment = p.attachment().segment;
  }
  r.code_bytes = p.cache().code_bytes();
  r.data_bytes = p.cache().data_bytes();
  r.own_code_count = p.own_code().size();
  r.sharee_code_count = p.sharee_code().size();
  r.stats = p.stats();
  r.wall_ns = wall_ns;
  r.costs = p.CostRecords();
  return r;
}

struct Worker {
  size_t app = 0;
  SymbolTable symbols;
  std::unique_ptr<CallStream> stream;
  std::unique_ptr<Process> process;
  EventLog events;
  uint64_t wall_ns = 0;
  bool crashed = false;
  std::string error;
};

ExperimentReport RunSimulated(const WorkloadSpec& spec, const RunConfig& config) {
  ExperimentReport report;
  std::unique_ptr<SharedRegion> region;
  if (config.mode == RunMode::kShareJit) region = SharedRegion::CreateAnonymous(config.region);
  ManualBeaconClock clock;
  std::set<uint64_t> alive;
  LivenessPolicy liveness{[&alive](uint64_t pid) { return alive.count(pid) > 0; }, 0};
  ProcessOptions options{config.mode, config.thresholds, config.sizing, config.gc_enabled,
                         config.compile};

  std::vector<size_t> order = AppOrder(spec, config.seed);
  std::vector<Worker> workers(order.size());
  auto start = [&](size_t w) {
    Worker& wk = workers[w];
    wk.app = order[w];
    wk.symbols = LoadAppProgram(spec, wk.app);
    wk.stream = std::make_unique<CallStream>(spec.apps[wk.app], wk.symbols, config.seed);
    uint64_t pid = 1001 + wk.app;
    alive.insert(pid);
    wk.process = std::make_unique<Process>(pid, wk.symbols, region.get(), &clock, liveness,
                                           options, &wk.events);
  };
  auto step = [&](Worker& wk, uint64_t n) {
    for (uint64_t k = 0; k < n && !wk.crashed && !wk.stream->Done(); ++k) {
      Invocation inv = wk.stream->Next();
      uint64_t t0 = NowNs();
      try {
        wk.process->InvokeSymbol(inv.symbol, inv.args);
      } catch (const std::exception& e) {
        wk.crashed = true;
        wk.error = e.what();
        alive.erase(wk.process->pid());
      }
      wk.wall_ns += NowNs() - t0;
      clock.Advance();
    }
  };

  if (spec.schedule == ScheduleKind::kSequential) {
    for (size_t w = 0; w < workers.size(); ++w) {
      start(w);
      step(workers[w], UINT64_MAX);
    }
  } else {
    for (size_t w = 0; w < workers.size(); ++w) start(w);
    bool more = true;
    while (more) {
      more = false;
      for (Worker& wk : workers) {
        step(wk, spec.chunk);
        more = more || (!wk.crashed && !wk.stream->Done());
      }
    }
  }

  for (Worker& wk : workers) {
    if (!wk.crashed) wk.process->LogExecTotals();
    ProcessReport r = Snapshot(*wk.process, spec.apps[wk.app].name, wk.wall_ns);
    r.crashed = wk.crashed;
    r.error = wk.error;
    report.partial = report.partial || wk.crashed;
    report.processes.push_back(std::move(r));
    report.events.Append(wk.events);
  }
  if (region) report.map = SharingMap(*region).Stats();
  for (Worker& wk : workers) {
    if (!wk.crashed) wk.process->Exit();
  }
  return report;
}

bool WriteAll(int fd, const std::string& data) {
  size_t done = 0;
  while (done < data.size()) {
    ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    done += static_cast<size_t>(n);
  }
  return true;
}

std::string ReadAll(int fd) {
  std::string out;
  char buf[1 << 16];
  for (;;) {
    ssize_t n = ::read(fd, buf, sizeof(buf));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    out.append(buf, static_cast<size_t>(n));
  }
  return out;
}

char WaitByte(int fd) {
  char c = 0;
  for (;;) {
    ssize_t n = ::read(fd, &c, 1);
    if (n < 0 && errno == EINTR) continue;
    return n == 1 ? c : 0;
  }
}

[[noreturn]] void WorkerMain(const WorkloadSpec& spec, const RunConfig& config, size_t app,
                             const SharedRegion* region, int control, int result) {
  int status = 0;
  if (WaitByte(control) != 'g') ::_exit(3);
  EventLog events;
  ProcessReport r;
  r.app = spec.apps[app].name;
  r.pid = static_cast<uint64_t>(::getpid());
  std::unique_ptr<Process> process;
  try {
    SymbolTable symbols = LoadAppProgram(spec, app);
    CallStream stream(spec.apps[app], symbols, config.seed);
    SteadyBeaconClock clock;
    LivenessPolicy liveness{OsProcessAlive, 0};
    ProcessOptions options{config.mode, config.thresholds, config.sizing, config.gc_enabled,
                           config.compile};
    process = std::make_unique<Process>(r.pid, symbols, region, &clock, liveness, options,
                                        &events);
    uint64_t wall = 0;
    while (!stream.Done()) {
      Invocation inv = stream.Next();
      uint64_t t0 = NowNs();
      process->InvokeSymbol(inv.symbol, inv.args);
      wall += NowNs() - t0;
    }
    process->LogExecTotals();
    r = Snapshot(*process, spec.apps[app].name, wall);
  } catch (const std::exception& e) {
    if (process) r = Snapshot(*process, spec.apps[app].name, 0);
    r.crashed = true;
    r.error = e.what();
    status = 1;
  }
  WriteAll(result, EncodeWorkerResult(r, events));
  ::close(result);
  WaitByte(control);
  if (process && status == 0) {
    try {
      process->Exit();
    } catch (const std::exception&) {
      status = 2;
    }
  }
  ::_exit(status);
}

ExperimentReport RunForked(const WorkloadSpec& spec, const RunConfig& config) {
  ExperimentReport report;
  std::unique_ptr<SharedRegion> region;
  if (config.mode == RunMode::kShareJit) {
    if (config.region_path.empty()) {
      region = SharedRegion::CreateAnonymous(config.region);
    } else if (std::filesystem::exists(config.region_path)) {
      region = SharedRegion::OpenFile(config.region_path);  // made by `create`
    } else {
      region = SharedRegion::CreateFile(config.region_path, config.region);
    }
  }
  std::vector<size_t> order = AppOrder(spec, config.seed);
  struct Child {
    pid_t pid = -1;
    int control = -1;
    int result = -1;
    size_t app = 0;
  };
  std::vector<Child> children;
  for (size_t app : order) {
    int control[2];
    int result[2];
    if (::pipe(control) != 0 || ::pipe(result) != 0) throw RegionError("pipe failed");
    pid_t pid = ::fork();
    if (pid < 0) throw RegionError("fork failed");
    if (pid == 0) {
      ::close(control[1]);
      ::close(result[0]);
      for (const Child& c : children) {
        ::close(c.control);
        ::close(c.result);
      }
      WorkerMain(spec, config, app, region.get(), control[0], result[1]);
    }
    ::close(control[0]);
    ::close(result[1]);
    children.push_back(Child{pid, control[1], result[0], app});
  }

  std::vector<std::string> payloads(children.size());
  if (spec.schedule == ScheduleKind::kSequential) {
    for (size_t i = 0; i < children.size(); ++i) {
      WriteAll(children[i].control, "g");
      payloads[i] = ReadAll(children[i].result);
    }
  } else {
    for (const Child& c : children) WriteAll(c.control, "g");
    for (size_t i = 0; i < children.size(); ++i) payloads[i] = ReadAll(children[i].result);
  }
  if (region) report.map = SharingMap(*region).Stats();
  for (const Child& c : children) {
    WriteAll(c.control, "x");
    ::close(c.control);
    ::close(c.result);
  }
  for (size_t i = 0; i < children.size(); ++i) {
    int status = 0;
    while (::waitpid(children[i].pid, &status, 0) < 0 && errno == EINTR) {
    }
    ProcessReport r;
    EventLog events;
    std::string error;
    if (!DecodeWorkerResult(payloads[i], &r, &events, &error)) {
      r = ProcessReport{};
      r.pid = static_cast<uint64_t>(children[i].pid);
      r.app = spec.apps[children[i].app].name;
      r.crashed = true;
      r.error = "no report from worker: " + error;
    }
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      r.crashed = true;
      if (r.error.empty()) r.error = "worker exited abnormally";
    }
    report.partial = report.partial || r.crashed;
    report.processes.push_back(std::move(r));
    report.events.Append(events);
  }
  return report;
}

}  // namespace

void ApplySpecConfig(const WorkloadSpec& spec, RunConfig* config) {
  for (const auto& [key, value] : spec.config) {
    if (key == "segments") {
      config->region.segment_count = static_cast<uint32_t>(ConfigCount(key, value));
    } else if (key == "segment_size") {
      config->region.segment_size = ConfigCount(key, value);
    } else if (key == "map_capacity") {
      config->region.map_capacity = static_cast<uint32_t>(ConfigCount(key, value));
    } else if (key == "sharing_threshold") {
      config->thresholds.sharing = ConfigCount(key, value);
    } else if (key == "hot_threshold") {
      config->thresholds.hot = ConfigCount(key, value);
    } else if (key == "warm_threshold") {
      config->thresholds.warm = ConfigCount(key, value);
    } else if (key == "osr_threshold") {
      config->thresholds.osr = ConfigCount(key, value);
    } else if (key == "initial_arena") {
      config->sizing.initial_arena_bytes = ConfigCount(key, value);
    } else if (key == "max_cache") {
      config->sizing.max_cache_bytes = ConfigCount(key, value);
    } else if (key == "seed") {
      config->seed = ConfigCount(key, value);
    } else if (key == "gc") {
      if (value != "on" && value != "off") throw ConfigError("config gc: expected on or off");
      config->gc_enabled = value == "on";
    } else {
      throw ConfigError("unknown config key " + key);
    }
  }
}

uint64_t ExperimentReport::TotalCodeBytes() const {
  uint64_t n = 0;
  for (const ProcessReport& p : processes) n += p.code_bytes;
  return n;
}

uint64_t ExperimentReport::TotalDataBytes() const {
  uint64_t n = 0;
  for (const ProcessReport& p : processes) n += p.data_bytes;
  return n;
}

uint64_t ExperimentReport::TotalCompiles() const {
  uint64_t n = 0;
  for (const ProcessReport& p : processes) n += p.stats.compiles;
  return n;
}

uint64_t ExperimentReport::TotalAdoptions() const {
  uint64_t n = 0;
  for (const ProcessReport& p : processes) n += p.stats.adoptions;
  return n;
}

uint64_t ExperimentReport::TotalCompileNs() const {
  uint64_t n = 0;
  for (const ProcessReport& p : processes) n += p.stats.total_compile_ns;
  return n;
}

double ExperimentReport::TotalWorkUnits() const {
  double n = 0;
  for (const ProcessReport& p : processes) n += p.work_units;
  return n;
}

uint64_t ExperimentReport::TotalWallNs() const {
  uint64_t n = 0;
  for (const ProcessReport& p : processes) n += p.wall_ns;
  return n;
}

std::vector<CostRecord> ExperimentReport::AllCosts() const {
  std::vector<CostRecord> out;
  for (const ProcessReport& p : processes) out.insert(out.end(), p.costs.begin(), p.costs.end());
  return out;
}

void Finalize(ExperimentReport* report) {
  uint64_t interp_ns = 0, interp_steps = 0, fast_ns = 0, fast_steps = 0;
  for (const ProcessReport& p : report->processes) {
    interp_ns += p.stats.interp_ns;
    interp_steps += p.stats.interp_steps;
    fast_ns += p.stats.compiled_ns;
    fast_steps += p.stats.fast_steps;
  }
  report->work_ratio = 1;
  if (interp_ns > 0 && interp_steps > 0 && fast_ns > 0 && fast_steps > 0) {
    double per_interp = static_cast<double>(interp_ns) / static_cast<double>(interp_steps);
    double per_fast = static_cast<double>(fast_ns) / static_cast<double>(fast_steps);
    report->work_ratio = per_fast / per_interp;
  }
  for (ProcessReport& p : report->processes) {
    p.work_units = static_cast<double>(p.stats.interp_steps) +
                   report->work_ratio * static_cast<double>(p.stats.fast_steps);
  }
  std::vector<CostRecord> costs = report->AllCosts();
  report->Y = TotalBenefit(costs, report->config.thresholds.sharing, report->config.thresholds.hot);
}

ExperimentReport RunExperiment(const WorkloadSpec& spec, const RunConfig& config) {
  config.thresholds.Validate();
  if (config.mode == RunMode::kShareJit) SharedRegion::ValidateConfig(config.region);
  ExperimentReport report = config.simulate ? RunSimulated(spec, config) : RunForked(spec, config);
  report.spec_name = spec.name;
  report.mode = config.mode;
  report.seed = config.seed;
  report.simulated = config.simulate;
  report.config = config;
  Finalize(&report);
  return report;
}

}  // namespace codeshare
