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

#include "codeshare/runtime/process.h"

#include <algorithm>
#include <string>

#include "codeshare/common/check.h"
#include "codeshare/jit/compiled_code.h"
#include "codeshare/jit/executor.h"

namespace codeshare {

const char* RunModeName(RunMode mode) {
  return mode == RunMode::kBaseline ? "baseline" : "sharejit";
}

const char* GcModeName(GcMode mode) { return mode == GcMode::kPartial ? "partial" : "full"; }

Process::Process(uint64_t pid, SymbolTable symbols, const SharedRegion* region,
                 BeaconClock* clock, LivenessPolicy liveness, ProcessOptions options,
                 EventLog* events)
    : pid_(pid),
      symbols_(std::move(symbols)),
      region_(region),
      clock_(clock),
      liveness_(std::move(liveness)),
      options_(std::move(options)),
      events_(events) {
  CS_CHECK(clock_ != nullptr, "a beacon clock is required");
  options_.thresholds.Validate();
  methods_.resize(symbols_.size());
  for (size_t i = 0; i < symbols_.size(); ++i) {
    methods_[i].symbol = static_cast<uint16_t>(i);
    methods_[i].def = symbols_.at(static_cast<uint16_t>(i)).method;
  }
  if (options_.mode == RunMode::kShareJit && region_ != nullptr) {
    const SharedRegion& r = *region_;
    attachment_ = AttachSegment(r, pid_, clock_->Now(), liveness_,
                                [&r](uint32_t segment, uint64_t dead_pid) {
                                  SharingMap map(r);
                                  map.InvalidateSegment(segment);
                                  map.ReleaseAllFor(dead_pid);
                                });
    if (attachment_.kind != AttachKind::kPrivateFallback) {
      cache_ = ProcessCache::ForSegment(r, attachment_.segment, attachment_.generation, pid_,
                                        options_.sizing);
      map_ = std::make_unique<SharingMap>(r);
      return;
    }
    cache_ = ProcessCache::Private(options_.sizing, region_);
    return;
  }
  cache_ = ProcessCache::Private(options_.sizing, nullptr);
}

Process::~Process() = default;

const RuntimeMethod& Process::method(std::string_view signature) const {
  auto idx = symbols_.Find(signature);
  CS_CHECK(idx && symbols_.at(*idx).IsMethod(), "no method " << signature);
  return methods_[*idx];
}

void Process::Heartbeat() {
  if (map_ != nullptr && !exited_) region_->StoreBeacon(attachment_.segment, clock_->Now());
}

Value Process::Invoke(std::string_view signature, std::span<const Value> args) {
  auto idx = symbols_.Find(signature);
  if (!idx) throw ProgramError("no symbol " + std::string(signature));
  return InvokeSymbol(*idx, args);
}

Value Process::InvokeSymbol(uint16_t symbol, std::span<const Value> args) {
  CS_CHECK(!exited_, "invoke after exit");
  CS_CHECK(depth_ == 0, "top-level invoke from inside an invocation");
  CS_CHECK(symbol < symbols_.size(), "symbol out of range");
  Heartbeat();
  uint16_t target = symbols_.ResolveTarget(symbol, args.empty() ? 0 : args[0]);
  Value v = Dispatch(target, args);
  Safepoint();
  return v;
}

Value Process::Call(uint16_t symbol, std::span<const Value> args) {
  return Dispatch(symbol, args);
}

bool Process::PassesValidityCheck(const RuntimeMethod& m) const {
  const EntryPoint& e = m.entry;
  if (!e.handle.is_private()) {
    if (region_ == nullptr || e.handle.segment >= region_->segment_count()) return false;
    if (region_->LoadGeneration(e.handle.segment) != e.handle.generation) return false;
  }
  if (e.has_binding && !map_->StillCurrent(e.slot, e.stamp)) return false;
  return true;
}

void Process::OnValidityFailure(RuntimeMethod& m) {
  ++stats_.validity_failures;
  ++m.validity_failures;
  if (events_ != nullptr) events_->ValidityFailure(pid_, Name(m), m.entry.handle);
  m.entry = EntryPoint{};
  // The binding changed under us: look for whatever the map now holds. The
  // stale code stays in the own or sharee map until the next collection.
  if (map_ != nullptr) {
    m.sharing_task_issued = true;
    tasks_.push_back(Task{TaskKind::kShare, m.symbol});
  }
}

const std::byte* Process::ResolveChecked(RuntimeMethod& m, size_t* available) {
  const CodeHandle& h = m.entry.handle;
  if (cache_->Owns(h)) {
    auto size = cache_->code_arena().SizeOf(h.offset);
    if (!size) return nullptr;
    *available = *size;
    return cache_->Resolve(h);
  }
  if (h.is_private() || region_ == nullptr || h.segment >= region_->segment_count()) {
    return nullptr;
  }
  uint64_t end = region_->SegmentOffset(h.segment) + region_->segment_size();
  if (h.offset >= end) return nullptr;
  *available = end - h.offset;
  return region_->base() + h.offset;
}

Value Process::Dispatch(uint16_t symbol, std::span<const Value> args) {
  RuntimeMethod& m = methods_[symbol];
  CS_CHECK(m.def != nullptr, "dispatch to a virtual slot");
  if (depth_ >= kMaxCallDepth) throw RuntimeFault(m.def->signature + ": call depth exceeded");
  ++stats_.invocations;
  uint64_t before = m.hotness;
  if (m.entry.compiled && !PassesValidityCheck(m)) OnValidityFailure(m);

  Value value;
  // Process-wide totals are exclusive of nested calls; per-method times are
  // inclusive.
  uint64_t outer_child_ns = child_ns_;
  child_ns_ = 0;
  uint64_t frame_start = NowNs();
  ++depth_;
  try {
    if (m.entry.compiled) {
      size_t available = 0;
      const std::byte* code = ResolveChecked(m, &available);
      std::string error = "unresolvable handle";
      std::optional<CompiledView> view;
      if (code != nullptr) view = CompiledView::Open(code, available, &*m.hash, &error);
      if (!view) {
        ++stats_.freed_code_derefs;
        throw AccessViolation(m.def->signature + ": compiled code failed its header check (" +
                              error + ")");
      }
      if (!m.entry.adopted) {
        auto own = own_.find(m.entry.handle);
        if (own != own_.end()) own->second.executed = true;
      }
      ++m.hotness;
      uint64_t t0 = NowNs();
      ExecResult r = ExecuteCompiled(*view, args, symbols_, *this);
      uint64_t dt = NowNs() - t0;
      m.compiled_ns += dt;
      ++m.compiled_calls;
      stats_.compiled_ns += dt - std::min(dt, child_ns_);
      ++stats_.compiled_invocations;
      stats_.fast_steps += r.steps;
      value = r.value;
      if (r.guard_failed) Deoptimize(m);
    } else {
      uint64_t t0 = NowNs();
      InterpResult r = Interpret(*m.def, args, symbols_, *this, m.profile.get());
      uint64_t dt = NowNs() - t0;
      m.interp_ns += dt;
      ++m.interp_calls;
      stats_.interp_ns += dt - std::min(dt, child_ns_);
      stats_.interp_steps += r.steps;
      m.hotness += 1 + r.back_edges;
      value = r.value;
    }
  } catch (...) {
    --depth_;
    child_ns_ = outer_child_ns;
    throw;
  }
  --depth_;
  child_ns_ = outer_child_ns + (NowNs() - frame_start);
  OnInvocation(m, before);
  return value;
}

void Process::Deoptimize(RuntimeMethod& m) {
  ++stats_.deopts;
  ++m.deopts;
  if (events_ != nullptr) events_->Deopt(pid_, Name(m), m.hotness);
  if (m.entry.has_binding && map_ != nullptr) map_->Invalidate(*m.hash, m.entry.handle);
  // Own code becomes non-entrant and waits for the collector; adopted code
  // is released by the next collection.
  m.entry = EntryPoint{};
  m.hotness = 0;
  m.sharing_task_issued = false;
  m.compile_task_issued = false;
}

void Process::Exit() {
  if (exited_) return;
  CS_CHECK(depth_ == 0, "exit during an invocation");
  if (map_ != nullptr) {
    for (const ShareeCode& s : sharee_) map_->Release(s.adoption, pid_);
    sharee_.clear();
    for (RuntimeMethod& m : methods_) {
      if (m.entry.adopted) m.entry = EntryPoint{};
    }
    region_->StoreBeacon(attachment_.segment, 0);
  }
  exited_ = true;
}

std::vector<CostRecord> Process::CostRecords() const {
  std::vector<CostRecord> out;
  for (const RuntimeMethod& m : methods_) {
    if (m.def == nullptr || m.interp_calls + m.compiled_calls == 0) continue;
    CostRecord r;
    r.method_hash = (m.hash ? *m.hash : HashIdentify(*m.def)).ToHex();
    r.H = static_cast<double>(m.hash_ns);
    r.L = static_cast<double>(m.lookup_ns);
    if (m.interp_calls) {
      r.Ti = static_cast<double>(m.interp_ns) / static_cast<double>(m.interp_calls);
    }
    if (m.compiled_calls) {
      r.Tc = static_cast<double>(m.compiled_ns) / static_cast<double>(m.compiled_calls);
    }
    r.J = static_cast<double>(m.compile_ns);
    r.HC = m.hotness;
    r.S = m.lookup_hit ? 1 : 0;
    out.push_back(std::move(r));
  }
  return out;
}

void Process::LogExecTotals() const {
  if (events_ == nullptr) return;
  for (const RuntimeMethod& m : methods_) {
    if (m.def == nullptr || m.interp_calls + m.compiled_calls == 0) continue;
    ExecTotals t{m.hotness, m.interp_ns, m.interp_calls, m.compiled_ns, m.compiled_calls};
    events_->Exec(pid_, Name(m), m.hash ? *m.hash : HashIdentify(*m.def), t);
  }
}

}  // namespace codeshare
