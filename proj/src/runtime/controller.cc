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

// Hotness ranges and the JIT task queue.

#include <cstring>

#include "codeshare/common/check.h"
#include "codeshare/jit/compiled_code.h"
#include "codeshare/runtime/process.h"

namespace codeshare {

namespace {

// Stack-map analogue kept in the data arena for each compiled method.
uint64_t MetadataBytes(const CompiledView& view) {
  uint64_t calls = 0;
  for (const FastOp& op : view.ops()) {
    if (op.kind == FastKind::kInvoke || op.kind == FastKind::kInvokeDirect) ++calls;
  }
  return 32 + 8 * calls;
}

}  // namespace

void Process::OnInvocation(RuntimeMethod& m, uint64_t before) {
  const Thresholds& t = options_.thresholds;
  uint64_t hc = m.hotness;
  if (hc <= before) return;
  if (Thresholds::Crossed(before, hc, t.warm) && m.profile == nullptr) {
    m.profile = std::make_unique<Profile>();
    ++stats_.profiles_created;
    pending_profiles_.push_back(m.symbol);
  }
  if (Thresholds::Crossed(before, hc, t.sharing) && map_ != nullptr && !m.sharing_task_issued &&
      !m.entry.compiled) {
    Enqueue(TaskKind::kShare, m);
  }
  if (Thresholds::Crossed(before, hc, t.hot) && !m.compile_task_issued && !m.entry.compiled) {
    Enqueue(TaskKind::kCompile, m);
  }
  if (Thresholds::Crossed(before, hc, t.osr)) ++stats_.osr_events;
}

void Process::Enqueue(TaskKind kind, RuntimeMethod& m) {
  if (kind == TaskKind::kShare) {
    m.sharing_task_issued = true;
  } else {
    m.compile_task_issued = true;
  }
  tasks_.push_back(Task{kind, m.symbol});
}

void Process::Safepoint() {
  CS_CHECK(depth_ == 0, "safepoint inside an invocation");
  while (!pending_profiles_.empty() || !tasks_.empty()) {
    if (!pending_profiles_.empty()) {
      uint16_t symbol = pending_profiles_.front();
      pending_profiles_.erase(pending_profiles_.begin());
      EnsureProfileBlock(methods_[symbol]);
      continue;
    }
    Task task = tasks_.front();
    tasks_.pop_front();
    RuntimeMethod& m = methods_[task.symbol];
    if (task.kind == TaskKind::kShare) {
      RunSharingTask(m);
    } else {
      RunCompileTask(m);
    }
  }
}

void Process::EnsureProfileBlock(RuntimeMethod& m) {
  if (m.profile == nullptr || m.profile_block) return;
  auto block = AllocateData(Profile::DataBytes(*m.def));
  if (!block) {
    m.profile.reset();  // no room to keep it
    return;
  }
  if (m.profile == nullptr) {
    // The collection that made room deleted this very profile.
    cache_->FreeData(*block);
    return;
  }
  m.profile_block = *block;
}

const HashId& Process::EnsureHash(RuntimeMethod& m) {
  if (!m.hash) m.hash = HashIdentify(*m.def);
  return *m.hash;
}

void Process::RunSharingTask(RuntimeMethod& m) {
  if (map_ == nullptr || m.entry.compiled) return;
  ++stats_.sharing_tasks;
  uint64_t hash_ns = 0;
  if (!m.hash) {
    uint64_t t0 = NowNs();
    m.hash = HashIdentify(*m.def);
    hash_ns = NowNs() - t0;
    m.hash_ns += hash_ns;
  }
  uint64_t t1 = NowNs();
  std::optional<Adoption> adoption = map_->Adopt(*m.hash, pid_, attachment_.segment);
  uint64_t lookup_ns = NowNs() - t1;
  m.lookup_ns += lookup_ns;

  uint64_t adopted_j = 0;
  if (adoption) {
    size_t available = 0;
    m.entry = EntryPoint{true, adoption->handle, true, true, adoption->slot, adoption->stamp};
    const std::byte* code = ResolveChecked(m, &available);
    std::string error = "unresolvable handle";
    std::optional<CompiledView> view;
    if (code != nullptr) view = CompiledView::Open(code, available, &*m.hash, &error);
    if (!view) {
      ++stats_.freed_code_derefs;
      m.entry = EntryPoint{};
      map_->Release(*adoption, pid_);
      throw AccessViolation(m.def->signature + ": adopted code failed its header check (" +
                            error + ")");
    }
    adopted_j = view->header().compile_ns;
    m.compile_ns += adopted_j;
    m.lookup_hit = true;
    sharee_.push_back(ShareeCode{m.symbol, *adoption});
    ++stats_.adoptions;
    ++stats_.sharing_hits;
  }
  if (events_ != nullptr) {
    events_->Share(pid_, Name(m), *m.hash, hash_ns, lookup_ns, adoption.has_value(), m.hotness,
                   adopted_j);
  }
  if (!adoption && m.hotness >= options_.thresholds.hot && !m.compile_task_issued) {
    Enqueue(TaskKind::kCompile, m);
  }
}

void Process::RunCompileTask(RuntimeMethod& m) {
  if (m.entry.compiled) return;
  ++stats_.compile_tasks;
  uint64_t t0 = NowNs();
  const HashId& key = EnsureHash(m);
  CompileOutput out = Compile(*m.def, key, m.profile.get(), symbols_, options_.compile);

  std::optional<CodeHandle> handle = AllocateCode(out.bytes.size());
  std::optional<DataHandle> metadata;
  if (handle) {
    auto view = CompiledView::Open(out.bytes.data(), out.bytes.size(), &key, nullptr);
    CS_CHECK(view.has_value(), "compiler produced an unreadable block");
    metadata = AllocateData(MetadataBytes(*view));
    if (!metadata) {
      cache_->FreeCode(*handle);
      handle.reset();
    }
  }
  if (!handle) {
    ++stats_.compile_discards;
    if (events_ != nullptr) events_->Discard(pid_, Name(m), out.bytes.size());
    return;
  }
  std::byte* dst = cache_->MutableCode(*handle);
  std::memcpy(dst, out.bytes.data(), out.bytes.size());
  uint64_t block = *cache_->code_arena().SizeOf(handle->offset);

  uint64_t j = NowNs() - t0;
  auto* header = reinterpret_cast<CompiledHeader*>(dst);
  header->compile_ns = j;

  OwnCode own{m.symbol, key, *handle, *metadata, block, false, true};
  EntryPoint entry{true, *handle, false, false, 0, 0};
  if (map_ != nullptr) {
    PublishResult pub = map_->Publish(key, *handle);
    if (pub.outcome == PublishOutcome::kMapFull) {
      ++stats_.publish_map_full;
    } else {
      ++stats_.publishes;
      own.published = true;
      entry.has_binding = true;
      entry.slot = pub.slot;
      entry.stamp = pub.stamp;
    }
  }
  own_.emplace(*handle, own);
  m.entry = entry;
  m.compile_ns += j;
  ++stats_.compiles;
  stats_.total_compile_ns += j;
  if (events_ != nullptr) events_->Compile(pid_, Name(m), key, j, block, *handle, own.published);
}

}  // namespace codeshare
