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

#ifndef CODESHARE_HARNESS_RUNNER_H_
#define CODESHARE_HARNESS_RUNNER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "codeshare/cache/process_cache.h"
#include "codeshare/cache/region.h"
#include "codeshare/cost/cost_model.h"
#include "codeshare/harness/workload.h"
#include "codeshare/map/sharing_map.h"
#include "codeshare/runtime/event_log.h"
#include "codeshare/runtime/process.h"
#include "codeshare/runtime/thresholds.h"

namespace codeshare {

struct RunConfig {
  RunMode mode = RunMode::kShareJit;
  uint64_t seed = 0;
  bool simulate = false;  // one address space, logical pids and clock
  RegionConfig region;
  Thresholds thresholds;
  CacheSizing sizing;
  bool gc_enabled = true;
  CompileOptions compile;
  // Real mode: region file, created unless it exists (empty: anonymous
  // mapping).
  std::string region_path;
};

// Applies `config` lines of the spec; the caller then applies its own flags.
void ApplySpecConfig(const WorkloadSpec& spec, RunConfig* config);

struct ProcessReport {
  uint64_t pid = 0;
  std::string app;
  std::string attach = "none";  // claimed | reclaimed | private | none
  int64_t segment = -1;
  uint64_t code_bytes = 0;
  uint64_t data_bytes = 0;
  uint64_t own_code_count = 0;
  uint64_t sharee_code_count = 0;
  ProcessStats stats;
  double work_units = 0;
  uint64_t wall_ns = 0;
  bool crashed = false;
  std::string error;
  std::vector<CostRecord> costs;
};

struct ExperimentReport {
  std::string spec_name;
  RunMode mode = RunMode::kShareJit;
  uint64_t seed = 0;
  bool simulated = false;
  RunConfig config;
  std::vector<ProcessReport> processes;
  MapStatsRecord map{};
  bool partial = false;  // a worker crashed
  double work_ratio = 1;  // fast-form step cost relative to an interpreter step
  double Y = 0;
  EventLog events;

  uint64_t TotalCodeBytes() const;
  uint64_t TotalDataBytes() const;
  uint64_t TotalCompiles() const;
  uint64_t TotalAdoptions() const;
  uint64_t TotalCompileNs() const;
  double TotalWorkUnits() const;
  uint64_t TotalWallNs() const;
  std::vector<CostRecord> AllCosts() const;
};

// Runs every app of the spec as one worker. Sequential schedules run workers
// one after another; interleaved schedules alternate chunks (simulation) or
// run workers concurrently (real processes). Workers stay alive until all
// have reported, then exit cleanly.
ExperimentReport RunExperiment(const WorkloadSpec& spec, const RunConfig& config);

// Derived figures filled in from the per-process data: work ratio, work
// units, Y.
void Finalize(ExperimentReport* report);

}  // namespace codeshare

#endif  // CODESHARE_HARNESS_RUNNER_H_
