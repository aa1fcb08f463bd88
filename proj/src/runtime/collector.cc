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

// Code-cache collection: partial/full alternation over the own-method and
// sharee-method maps.

#include "codeshare/common/check.h"
#include "codeshare/runtime/process.h"

namespace codeshare {

namespace {

constexpr int kMaxAllocationRounds = 128;

}  // namespace

template <typename T, typename Fn>
std::optional<T> Process::AllocateWithCollection(Fn&& attempt) {
  if (auto r = attempt()) return r;
  for (int round = 0; round < kMaxAllocationRounds; ++round) {
    if (!options_.gc_enabled || in_collection_) {
      if (!cache_->Grow()) return std::nullopt;
      ++stats_.arena_grows;
      if (auto r = attempt()) return r;
      continue;
    }
    GcResult g = Collect();
    if (auto r = attempt()) return r;
    if (g.bytes_freed == 0) {
      if (!cache_->Grow()) return std::nullopt;  // at the cap: discard
      ++stats_.arena_grows;
      if (auto r = attempt()) return r;
    }
  }
  return std::nullopt;
}

std::optional<CodeHandle> Process::AllocateCode(uint64_t size) {
  return AllocateWithCollection<CodeHandle>([&] { return cache_->AllocateCode(size); });
}

std::optional<DataHandle> Process::AllocateData(uint64_t size) {
  return AllocateWithCollection<DataHandle>([&] { return cache_->AllocateData(size); });
}

void Process::DeleteProfile(RuntimeMethod& m) {
  if (m.profile_block) cache_->FreeData(*m.profile_block);
  m.profile_block.reset();
  m.profile.reset();
}

bool Process::AdopterDead(uint64_t pid, uint32_t segment) const {
  if (region_ == nullptr || segment >= region_->segment_count()) return true;
  if (region_->LoadOwner(segment) != pid) return true;
  return SegmentOwnerDead(*region_, segment, clock_->Now(), liveness_);
}

GcResult Process::Collect() {
  CS_CHECK(depth_ == 0, "collection outside a safepoint");
  CS_CHECK(!in_collection_, "recursive collection");
  CS_CHECK(!exited_, "collection after exit");
  in_collection_ = true;
  GcResult g;
  g.mode = next_gc_;
  next_gc_ = g.mode == GcMode::kPartial ? GcMode::kFull : GcMode::kPartial;
  stats_.gc_modes.push_back(g.mode);

  if (g.mode == GcMode::kFull) {
    for (auto& [handle, own] : own_) {
      RuntimeMethod& m = methods_[own.symbol];
      if (m.entry.compiled && !m.entry.adopted && m.entry.handle == handle && !own.executed) {
        m.entry = EntryPoint{};
        ++g.made_non_entrant;
      }
    }
    for (RuntimeMethod& m : methods_) {
      if ((m.profile || m.profile_block) &&
          (m.hotness < options_.thresholds.hot || m.entry.adopted)) {
        DeleteProfile(m);
        ++g.profiles_deleted;
      }
    }
  }

  for (auto it = own_.begin(); it != own_.end();) {
    const OwnCode& c = it->second;
    const RuntimeMethod& m = methods_[c.symbol];
    if (m.entry.compiled && !m.entry.adopted && m.entry.handle == c.handle) {
      ++it;
      continue;
    }
    if (c.published && map_ != nullptr) {
      if (!map_->TryRetire(c.key, c.handle)) {
        ++g.kept_refcount;
        ++it;
        continue;
      }
      if (map_->RefCount(c.handle) != 0) {
        ++stats_.refcount_violations;
        CS_CHECK(false, "freeing code that another process still references");
      }
    }
    g.bytes_freed += cache_->FreeCode(c.handle);
    g.bytes_freed += cache_->FreeData(c.metadata);
    ++g.code_freed;
    it = own_.erase(it);
  }

  for (auto it = sharee_.begin(); it != sharee_.end();) {
    const RuntimeMethod& m = methods_[it->symbol];
    if (m.entry.compiled && m.entry.adopted && m.entry.handle == it->adoption.handle) {
      ++it;
      continue;
    }
    map_->Release(it->adoption, pid_);
    ++g.sharee_released;
    it = sharee_.erase(it);
  }

  if (map_ != nullptr) {
    g.dead_adoptions_released = map_->SweepDeadAdopters(
        [this](uint64_t pid, uint32_t segment) { return AdopterDead(pid, segment); });
  }

  if (g.mode == GcMode::kPartial) {
    for (auto& [handle, own] : own_) own.executed = false;
    if (cache_->Grow()) ++stats_.arena_grows;
  }

  stats_.gc_bytes_freed += g.bytes_freed;
  stats_.gc_code_freed += g.code_freed;
  stats_.gc_kept_refcount += g.kept_refcount;
  stats_.gc_sharee_released += g.sharee_released;
  stats_.gc_dead_adoptions_released += g.dead_adoptions_released;
  if (events_ != nullptr) {
    events_->Gc(pid_, GcModeName(g.mode), g.bytes_freed, g.kept_refcount, g.sharee_released);
  }
  in_collection_ = false;
  return g;
}

}  // namespace codeshare
