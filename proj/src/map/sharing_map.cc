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

#include "codeshare/map/sharing_map.h"

#include <atomic>
#include <cerrno>
#include <cstring>

#include "codeshare/common/check.h"

namespace codeshare {

namespace {

constexpr uint32_t kSlotEmpty = 0;
constexpr uint32_t kSlotLive = 1;
constexpr uint32_t kSlotTombstone = 2;

uint64_t Mix(uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdull;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ull;
  x ^= x >> 33;
  return x;
}

uint64_t HandleHash(const CodeHandle& h) {
  return Mix(h.offset ^ (uint64_t{h.segment} << 48) ^ Mix(h.generation));
}

HashId KeyOf(const uint8_t* bytes) {
  HashId id;
  std::memcpy(id.digest.data(), bytes, id.digest.size());
  return id;
}

bool KeyEquals(const uint8_t* bytes, const HashId& key) {
  return std::memcmp(bytes, key.digest.data(), key.digest.size()) == 0;
}

CodeHandle NodeHandle(const MapNodeRecord& n) {
  return CodeHandle{n.segment, n.offset, n.generation};
}

CodeHandle LedgerHandle(const LedgerRecord& r) {
  return CodeHandle{r.segment, r.offset, r.generation};
}

uint64_t LoadStamp(const MapNodeRecord& n) {
  return std::atomic_ref<const uint64_t>(n.stamp).load(std::memory_order_acquire);
}

void BumpStamp(MapNodeRecord& n) {
  std::atomic_ref<uint64_t>(n.stamp).fetch_add(1, std::memory_order_acq_rel);
}

}  // namespace

class SharingMap::Locked {
 public:
  explicit Locked(SharingMap& map) : map_(map) {
    CS_CHECK(map_.lock_depth_ == 0, "sharing-map lock is not recursive");
    int rc = pthread_mutex_lock(map_.region_.map_lock());
    if (rc == EOWNERDEAD) {
      // The previous holder died inside a critical section. Every update
      // below leaves the tables consistent at each store, so resume.
      pthread_mutex_consistent(map_.region_.map_lock());
      ++map_.lock_depth_;
      map_.StatsRecord()->lock_recoveries++;
    } else {
      CS_CHECK(rc == 0, "pthread_mutex_lock failed: " << rc);
      ++map_.lock_depth_;
    }
    ++map_.lock_acquisitions_;
  }
  ~Locked() {
    --map_.lock_depth_;
    pthread_mutex_unlock(map_.region_.map_lock());
  }
  Locked(const Locked&) = delete;
  Locked& operator=(const Locked&) = delete;

 private:
  SharingMap& map_;
};

SharingMap::SharingMap(const SharedRegion& region)
    : region_(region),
      map_capacity_(region.header().map_capacity),
      coderef_capacity_(region.header().coderef_capacity),
      ledger_capacity_(region.header().ledger_capacity) {}

void SharingMap::AssertLocked() const {
  CS_CHECK(lock_depth_ > 0, "sharing-map access without holding the lock");
}

MapNodeRecord* SharingMap::Nodes() const {
  AssertLocked();
  return region_.At<MapNodeRecord>(region_.header().map_offset);
}

CodeRefRecord* SharingMap::CodeRefs() const {
  AssertLocked();
  return region_.At<CodeRefRecord>(region_.header().coderef_offset);
}

LedgerRecord* SharingMap::Ledger() const {
  AssertLocked();
  return region_.At<LedgerRecord>(region_.header().ledger_offset);
}

MapStatsRecord* SharingMap::StatsRecord() const {
  AssertLocked();
  return region_.At<MapStatsRecord>(region_.header().stats_offset);
}

std::optional<uint32_t> SharingMap::FindNode(const HashId& key) const {
  MapNodeRecord* nodes = Nodes();
  uint32_t start = static_cast<uint32_t>(Mix(key.Low64()) % map_capacity_);
  for (uint32_t i = 0; i < map_capacity_; ++i) {
    uint32_t slot = (start + i) % map_capacity_;
    const MapNodeRecord& n = nodes[slot];
    if (n.state == kSlotEmpty) return std::nullopt;
    if (n.state == kSlotLive && KeyEquals(n.key, key)) return slot;
  }
  return std::nullopt;
}

CodeRefRecord* SharingMap::FindCodeRef(const CodeHandle& handle, bool create) {
  CodeRefRecord* refs = CodeRefs();
  uint32_t start = static_cast<uint32_t>(HandleHash(handle) % coderef_capacity_);
  CodeRefRecord* reuse = nullptr;
  for (uint32_t i = 0; i < coderef_capacity_; ++i) {
    CodeRefRecord& r = refs[(start + i) % coderef_capacity_];
    if (r.state == kSlotEmpty) {
      if (reuse == nullptr) reuse = &r;
      break;
    }
    if (r.state == kSlotTombstone) {
      if (reuse == nullptr) reuse = &r;
      continue;
    }
    if (r.segment == handle.segment && r.offset == handle.offset &&
        r.generation == handle.generation) {
      return &r;
    }
  }
  if (!create || reuse == nullptr) return nullptr;
  *reuse = CodeRefRecord{kSlotLive, 0, handle.segment, 0, handle.offset, handle.generation};
  return reuse;
}

void SharingMap::DropCodeRef(const CodeHandle& handle, uint32_t n) {
  CodeRefRecord* ref = FindCodeRef(handle, false);
  CS_CHECK(ref != nullptr && ref->count >= n, "code reference count underflow");
  ref->count -= n;
  if (ref->count == 0) ref->state = kSlotTombstone;
  if (auto slot = FindNodeByHandle(handle)) {
    MapNodeRecord& node = Nodes()[*slot];
    CS_CHECK(node.refcount >= n, "node refcount underflow");
    node.refcount -= n;
  }
}

std::optional<uint32_t> SharingMap::FindNodeByHandle(const CodeHandle& handle) const {
  // Nodes binding a given handle are rare to search for (only on release),
  // and the handle's key is not known to the code-ref table, so scan.
  MapNodeRecord* nodes = Nodes();
  for (uint32_t slot = 0; slot < map_capacity_; ++slot) {
    const MapNodeRecord& n = nodes[slot];
    if (n.state == kSlotLive && NodeHandle(n) == handle) return slot;
  }
  return std::nullopt;
}

LedgerRecord* SharingMap::FindLedger(uint64_t pid, const CodeHandle& handle, bool create) {
  LedgerRecord* ledger = Ledger();
  uint32_t start = static_cast<uint32_t>(Mix(pid ^ HandleHash(handle)) % ledger_capacity_);
  LedgerRecord* reuse = nullptr;
  for (uint32_t i = 0; i < ledger_capacity_; ++i) {
    LedgerRecord& r = ledger[(start + i) % ledger_capacity_];
    if (r.state == kSlotEmpty) {
      if (reuse == nullptr) reuse = &r;
      break;
    }
    if (r.state == kSlotTombstone) {
      if (reuse == nullptr) reuse = &r;
      continue;
    }
    if (r.pid == pid && LedgerHandle(r) == handle) return &r;
  }
  if (!create || reuse == nullptr) return nullptr;
  std::memset(reuse, 0, sizeof(*reuse));
  reuse->state = kSlotLive;
  reuse->pid = pid;
  reuse->segment = handle.segment;
  reuse->offset = handle.offset;
  reuse->generation = handle.generation;
  return reuse;
}

void SharingMap::RemoveLedgerAdoption(LedgerRecord* rec, uint32_t n) {
  CS_CHECK(rec->count >= n, "ledger count underflow");
  CodeHandle handle = LedgerHandle(*rec);
  rec->count -= n;
  if (rec->count == 0) rec->state = kSlotTombstone;
  DropCodeRef(handle, n);
}

std::optional<MapEntry> SharingMap::Lookup(const HashId& key) {
  Locked lock(*this);
  MapStatsRecord* stats = StatsRecord();
  stats->lookups++;
  auto slot = FindNode(key);
  if (!slot) return std::nullopt;
  const MapNodeRecord& n = Nodes()[*slot];
  if (!n.valid) return std::nullopt;
  stats->hits++;
  return MapEntry{key, NodeHandle(n), n.refcount, true, *slot, LoadStamp(n)};
}

std::optional<Adoption> SharingMap::Adopt(const HashId& key, uint64_t pid,
                                          uint32_t adopter_segment) {
  Locked lock(*this);
  MapStatsRecord* stats = StatsRecord();
  stats->lookups++;
  auto slot = FindNode(key);
  if (!slot) return std::nullopt;
  MapNodeRecord& n = Nodes()[*slot];
  if (!n.valid) return std::nullopt;
  CodeHandle handle = NodeHandle(n);
  if (handle.segment >= region_.segment_count() ||
      region_.LoadGeneration(handle.segment) != handle.generation) {
    stats->stale_adoptions++;
    return std::nullopt;
  }
  LedgerRecord* rec = FindLedger(pid, handle, true);
  if (rec == nullptr) {
    stats->ledger_full_events++;
    return std::nullopt;
  }
  CodeRefRecord* ref = FindCodeRef(handle, true);
  if (ref == nullptr) {
    if (rec->count == 0) rec->state = kSlotTombstone;
    stats->ledger_full_events++;
    return std::nullopt;
  }
  uint64_t stamp = LoadStamp(n);
  std::memcpy(rec->key, key.digest.data(), key.digest.size());
  rec->adopter_segment = adopter_segment;
  rec->stamp = stamp;
  rec->count++;
  ref->count++;
  n.refcount++;
  stats->hits++;
  stats->adoptions++;
  return Adoption{key, handle, *slot, stamp};
}

PublishResult SharingMap::Publish(const HashId& key, const CodeHandle& handle) {
  Locked lock(*this);
  MapStatsRecord* stats = StatsRecord();
  MapNodeRecord* nodes = Nodes();
  PublishResult result;
  if (auto slot = FindNode(key)) {
    MapNodeRecord& n = nodes[*slot];
    result.outcome = PublishOutcome::kOverwrote;
    result.previous = NodeHandle(n);
    n.segment = handle.segment;
    n.offset = handle.offset;
    n.generation = handle.generation;
    n.valid = 1;
    const CodeRefRecord* ref = FindCodeRef(handle, false);
    n.refcount = ref == nullptr ? 0 : ref->count;
    BumpStamp(n);
    result.slot = *slot;
    result.stamp = LoadStamp(n);
    stats->overwrites++;
    stats->publishes++;
    return result;
  }
  uint32_t start = static_cast<uint32_t>(Mix(key.Low64()) % map_capacity_);
  for (uint32_t i = 0; i < map_capacity_; ++i) {
    uint32_t slot = (start + i) % map_capacity_;
    MapNodeRecord& n = nodes[slot];
    if (n.state == kSlotLive) continue;
    std::memcpy(n.key, key.digest.data(), key.digest.size());
    n.segment = handle.segment;
    n.offset = handle.offset;
    n.generation = handle.generation;
    n.refcount = 0;
    n.valid = 1;
    n.state = kSlotLive;
    BumpStamp(n);
    stats->entries++;
    stats->publishes++;
    result.outcome = PublishOutcome::kInserted;
    result.slot = slot;
    result.stamp = LoadStamp(n);
    return result;
  }
  stats->map_full_events++;
  result.outcome = PublishOutcome::kMapFull;
  return result;
}

void SharingMap::Release(const Adoption& adoption, uint64_t pid) {
  Locked lock(*this);
  LedgerRecord* rec = FindLedger(pid, adoption.handle, false);
  CS_CHECK(rec != nullptr, "release of code that process " << pid << " never adopted");
  RemoveLedgerAdoption(rec, 1);
  StatsRecord()->releases++;
}

bool SharingMap::Invalidate(const HashId& key, const CodeHandle& handle) {
  Locked lock(*this);
  auto slot = FindNode(key);
  if (!slot) return false;
  MapNodeRecord& n = Nodes()[*slot];
  if (NodeHandle(n) != handle || !n.valid) return false;
  n.valid = 0;
  BumpStamp(n);
  StatsRecord()->invalidations++;
  return true;
}

size_t SharingMap::InvalidateSegment(uint32_t segment) {
  Locked lock(*this);
  MapNodeRecord* nodes = Nodes();
  MapStatsRecord* stats = StatsRecord();
  size_t dropped = 0;
  for (uint32_t slot = 0; slot < map_capacity_; ++slot) {
    MapNodeRecord& n = nodes[slot];
    if (n.state != kSlotLive || n.segment != segment) continue;
    n.valid = 0;
    n.state = kSlotTombstone;
    BumpStamp(n);
    stats->entries--;
    ++dropped;
  }
  stats->reclaimed_nodes += dropped;
  return dropped;
}

bool SharingMap::TryRetire(const HashId& key, const CodeHandle& handle) {
  Locked lock(*this);
  const CodeRefRecord* ref = FindCodeRef(handle, false);
  if (ref != nullptr && ref->count > 0) return false;
  if (auto slot = FindNode(key)) {
    MapNodeRecord& n = Nodes()[*slot];
    if (NodeHandle(n) == handle) {
      n.valid = 0;
      n.state = kSlotTombstone;
      BumpStamp(n);
      MapStatsRecord* stats = StatsRecord();
      stats->entries--;
      stats->retired++;
    }
  }
  return true;
}

uint32_t SharingMap::RefCount(const CodeHandle& handle) {
  Locked lock(*this);
  const CodeRefRecord* ref = FindCodeRef(handle, false);
  return ref == nullptr ? 0 : ref->count;
}

size_t SharingMap::ReleaseAllFor(uint64_t pid) {
  Locked lock(*this);
  LedgerRecord* ledger = Ledger();
  size_t released = 0;
  for (uint32_t i = 0; i < ledger_capacity_; ++i) {
    LedgerRecord& r = ledger[i];
    if (r.state != kSlotLive || r.pid != pid) continue;
    released += r.count;
    RemoveLedgerAdoption(&r, r.count);
  }
  StatsRecord()->releases += released;
  return released;
}

size_t SharingMap::SweepDeadAdopters(
    const std::function<bool(uint64_t pid, uint32_t segment)>& is_dead) {
  Locked lock(*this);
  LedgerRecord* ledger = Ledger();
  size_t released = 0;
  for (uint32_t i = 0; i < ledger_capacity_; ++i) {
    LedgerRecord& r = ledger[i];
    if (r.state != kSlotLive || !is_dead(r.pid, r.adopter_segment)) continue;
    released += r.count;
    RemoveLedgerAdoption(&r, r.count);
  }
  StatsRecord()->dead_releases += released;
  return released;
}

bool SharingMap::StillCurrent(uint32_t slot, uint64_t stamp) const {
  if (slot >= map_capacity_) return false;
  const auto* nodes = region_.At<const MapNodeRecord>(region_.header().map_offset);
  return LoadStamp(nodes[slot]) == stamp;
}

MapStatsRecord SharingMap::Stats() {
  Locked lock(*this);
  return *StatsRecord();
}

std::vector<MapEntry> SharingMap::Snapshot() {
  Locked lock(*this);
  std::vector<MapEntry> out;
  MapNodeRecord* nodes = Nodes();
  for (uint32_t slot = 0; slot < map_capacity_; ++slot) {
    const MapNodeRecord& n = nodes[slot];
    if (n.state != kSlotLive) continue;
    out.push_back(MapEntry{KeyOf(n.key), NodeHandle(n), n.refcount, n.valid != 0, slot,
                           LoadStamp(n)});
  }
  return out;
}

std::vector<LedgerRecord> SharingMap::LedgerSnapshot() {
  Locked lock(*this);
  std::vector<LedgerRecord> out;
  LedgerRecord* ledger = Ledger();
  for (uint32_t i = 0; i < ledger_capacity_; ++i) {
    if (ledger[i].state == kSlotLive) out.push_back(ledger[i]);
  }
  return out;
}

}  // namespace codeshare
