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

#ifndef CODESHARE_RUNTIME_PROCESS_H_
#define CODESHARE_RUNTIME_PROCESS_H_

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "codeshare/cache/process_cache.h"
#include "codeshare/cache/region.h"
#include "codeshare/common/clock.h"
#include "codeshare/cost/cost_model.h"
#include "codeshare/hash/hash_id.h"
#include "codeshare/jit/compiler.h"
#include "codeshare/jit/profile.h"
#include "codeshare/map/sharing_map.h"
#include "codeshare/runtime/event_log.h"
#include "codeshare/runtime/thresholds.h"
#include "codeshare/vm/interpreter.h"
#include "codeshare/vm/program.h"

namespace codeshare {

enum class RunMode { kBaseline, kShareJit };
enum class GcMode { kPartial, kFull };

const char* RunModeName(RunMode mode);
const char* GcModeName(GcMode mode);

inline constexpr size_t kMaxCallDepth = 2048;

struct ProcessOptions {
  RunMode mode = RunMode::kShareJit;
  Thresholds thresholds;
  CacheSizing sizing;
  bool gc_enabled = true;
  CompileOptions compile;
};

// Where a method's invocations go.
struct EntryPoint {
  bool compiled = false;
  CodeHandle handle;
  bool adopted = false;  // code compiled by another process
  // Map binding the code was installed from (published or adopted); absent
  // for private code and for code the map had no room for.
  bool has_binding = false;
  uint32_t slot = 0;
  uint64_t stamp = 0;
};

struct RuntimeMethod {
  uint16_t symbol = 0;
  std::shared_ptr<const MethodDef> def;
  uint64_t hotness = 0;
  EntryPoint entry;
  std::unique_ptr<Profile> profile;
  std::optional<DataHandle> profile_block;
  bool sharing_task_issued = false;
  bool compile_task_issued = false;
  std::optional<HashId> hash;

  // Cost accounting.
  uint64_t hash_ns = 0;
  uint64_t lookup_ns = 0;
  uint64_t interp_ns = 0;
  uint64_t interp_calls = 0;
  uint64_t compiled_ns = 0;
  uint64_t compiled_calls = 0;
  uint64_t compile_ns = 0;  // own compilations, or J of adopted code
  bool lookup_hit = false;
  uint64_t validity_failures = 0;
  uint64_t deopts = 0;
};

// Code in this process's own cache, keyed by handle in the own-method map.
struct OwnCode {
  uint16_t symbol = 0;
  HashId key;
  CodeHandle handle;
  DataHandle metadata;
  uint64_t bytes = 0;
  bool published = false;
  bool executed = false;  // since the last partial collection
};

// Code adopted from another process (sharee-method map entry).
struct ShareeCode {
  uint16_t symbol = 0;
  Adoption adoption;
};

struct GcResult {
  GcMode mode = GcMode::kPartial;
  uint64_t bytes_freed = 0;
  uint64_t code_freed = 0;
  uint64_t kept_refcount = 0;
  uint64_t sharee_released = 0;
  uint64_t profiles_deleted = 0;
  uint64_t made_non_entrant = 0;
  uint64_t dead_adoptions_released = 0;
};

struct ProcessStats {
  uint64_t invocations = 0;
  uint64_t compiled_invocations = 0;
  uint64_t interp_steps = 0;
  uint64_t fast_steps = 0;
  uint64_t interp_ns = 0;    // exclusive of callees
  uint64_t compiled_ns = 0;  // exclusive of callees
  uint64_t sharing_tasks = 0;
  uint64_t sharing_hits = 0;
  uint64_t compile_tasks = 0;
  uint64_t compiles = 0;
  uint64_t compile_discards = 0;
  uint64_t total_compile_ns = 0;
  uint64_t publishes = 0;
  uint64_t publish_map_full = 0;
  uint64_t adoptions = 0;
  uint64_t deopts = 0;
  uint64_t validity_failures = 0;
  uint64_t osr_events = 0;
  uint64_t profiles_created = 0;
  // Safety counters; any non-zero value is a bug.
  uint64_t freed_code_derefs = 0;
  uint64_t refcount_violations = 0;
  // Collector.
  std::vector<GcMode> gc_modes;
  uint64_t gc_bytes_freed = 0;
  uint64_t gc_code_freed = 0;
  uint64_t gc_kept_refcount = 0;
  uint64_t gc_sharee_released = 0;
  uint64_t gc_dead_adoptions_released = 0;
  uint64_t arena_grows = 0;
};

// One runtime instance: a symbol table, its methods, a JIT cache, and (in
// sharing mode) a view of the global cache and sharing map. Real workers run
// one per OS process; the simulation runs several in one address space, all
// attached to the same region.
class Process : public CallSink {
 public:
  // Attaches to `region` in sharing mode (null means no global cache, which
  // behaves like the private fallback). Baseline processes never attach.
  Process(uint64_t pid, SymbolTable symbols, const SharedRegion* region, BeaconClock* clock,
          LivenessPolicy liveness, ProcessOptions options, EventLog* events);
  ~Process() override;
  Process(const Process&) = delete;
  Process& operator=(const Process&) = delete;

  // Top-level call by signature or symbol, followed by a safepoint at which
  // queued JIT tasks run.
  Value Invoke(std::string_view signature, std::span<const Value> args);
  Value InvokeSymbol(uint16_t symbol, std::span<const Value> args);

  // Nested calls from running code.
  Value Call(uint16_t symbol, std::span<const Value> args) override;

  // Drains the task queue; only valid with no invocation in progress.
  void Safepoint();

  // Runs one collection in the next mode of the alternation.
  GcResult Collect();

  // Clean exit: releases every adoption and marks the segment as free to
  // reclaim. Published code stays usable by others until then.
  void Exit();

  // Refreshes the liveness beacon.
  void Heartbeat();

  uint64_t pid() const { return pid_; }
  RunMode mode() const { return options_.mode; }
  bool sharing() const { return map_ != nullptr; }
  const Attachment& attachment() const { return attachment_; }
  const ProcessCache& cache() const { return *cache_; }
  const SymbolTable& symbols() const { return symbols_; }
  const ProcessOptions& options() const { return options_; }
  const ProcessStats& stats() const { return stats_; }
  const std::vector<RuntimeMethod>& methods() const { return methods_; }
  const RuntimeMethod& method(std::string_view signature) const;
  const std::map<CodeHandle, OwnCode>& own_code() const { return own_; }
  const std::vector<ShareeCode>& sharee_code() const { return sharee_; }
  SharingMap* sharing_map() const { return map_.get(); }
  bool exited() const { return exited_; }
  size_t pending_tasks() const { return tasks_.size(); }

  // One record per method invoked at least once.
  std::vector<CostRecord> CostRecords() const;
  // Appends one exec event per invoked method to the event log.
  void LogExecTotals() const;

 private:
  enum class TaskKind { kShare, kCompile };
  struct Task {
    TaskKind kind;
    uint16_t symbol;
  };

  Value Dispatch(uint16_t symbol, std::span<const Value> args);
  bool PassesValidityCheck(const RuntimeMethod& m) const;
  void OnValidityFailure(RuntimeMethod& m);
  const std::byte* ResolveChecked(RuntimeMethod& m, size_t* available);
  void Deoptimize(RuntimeMethod& m);

  // Controller.
  void OnInvocation(RuntimeMethod& m, uint64_t before);
  void Enqueue(TaskKind kind, RuntimeMethod& m);
  void RunSharingTask(RuntimeMethod& m);
  void RunCompileTask(RuntimeMethod& m);
  void EnsureProfileBlock(RuntimeMethod& m);
  const HashId& EnsureHash(RuntimeMethod& m);

  // Collector.
  std::optional<CodeHandle> AllocateCode(uint64_t size);
  std::optional<DataHandle> AllocateData(uint64_t size);
  template <typename T, typename Fn>
  std::optional<T> AllocateWithCollection(Fn&& attempt);
  void DeleteProfile(RuntimeMethod& m);
  bool AdopterDead(uint64_t pid, uint32_t segment) const;

  std::string_view Name(const RuntimeMethod& m) const { return m.def->signature; }

  uint64_t pid_;
  SymbolTable symbols_;
  const SharedRegion* region_;
  BeaconClock* clock_;
  LivenessPolicy liveness_;
  ProcessOptions options_;
  EventLog* events_;

  Attachment attachment_;
  std::unique_ptr<ProcessCache> cache_;
  std::unique_ptr<SharingMap> map_;
  std::vector<RuntimeMethod> methods_;
  std::map<CodeHandle, OwnCode> own_;
  std::vector<ShareeCode> sharee_;
  std::deque<Task> tasks_;
  std::vector<uint16_t> pending_profiles_;
  GcMode next_gc_ = GcMode::kPartial;
  size_t depth_ = 0;
  uint64_t child_ns_ = 0;  // time spent in callees of the current frame
  bool in_collection_ = false;
  bool exited_ = false;
  ProcessStats stats_;
};

}  // namespace codeshare

#endif  // CODESHARE_RUNTIME_PROCESS_H_
