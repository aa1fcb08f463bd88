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

#ifndef CODESHARE_MAP_SHARING_MAP_H_
#define CODESHARE_MAP_SHARING_MAP_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "codeshare/cache/code_handle.h"
#include "codeshare/cache/region.h"
#include "codeshare/hash/hash_id.h"

namespace codeshare {

// In-region records. All fields are little-endian and accessed in place.
struct MapNodeRecord {
  uint8_t key[16];
  uint32_t state;  // kSlotEmpty / kSlotLive / kSlotTombstone
  uint32_t valid;
  uint32_t segment;
  uint32_t refcount;
  uint64_t offset;
  uint64_t generation;
  uint64_t stamp;  // bumped on every change of the slot's binding; never reset
  uint64_t reserved;
};
static_assert(sizeof(MapNodeRecord) == kMapNodeSize);

// Number of unreleased adoptions of one specific piece of code. The node's
// refcount mirrors the entry for the node's current handle; entries for
// overwritten code keep that code alive until its sharees release it.
struct CodeRefRecord {
  uint32_t state;
  uint32_t count;
  uint32_t segment;
  uint32_t reserved;
  uint64_t offset;
  uint64_t generation;
};
static_assert(sizeof(CodeRefRecord) == kCodeRefSize);

// One process's adoption of one piece of code.
struct LedgerRecord {
  uint32_t state;
  uint32_t adopter_segment;
  uint64_t pid;
  uint8_t key[16];
  uint32_t segment;
  uint32_t count;
  uint64_t offset;
  uint64_t generation;
  uint64_t stamp;
};
static_assert(sizeof(LedgerRecord) == kLedgerEntrySize);

struct MapStatsRecord {
  uint64_t entries;
  uint64_t adoptions;
  uint64_t overwrites;
  uint64_t map_full_events;
  uint64_t publishes;
  uint64_t releases;
  uint64_t invalidations;
  uint64_t retired;
  uint64_t dead_releases;
  uint64_t ledger_full_events;
  uint64_t reclaimed_nodes;
  uint64_t lookups;
  uint64_t hits;
  uint64_t stale_adoptions;
  uint64_t lock_recoveries;
  uint64_t reserved;
};
static_assert(sizeof(MapStatsRecord) == kMapStatsSize);

struct MapEntry {
  HashId key;
  CodeHandle handle;
  uint32_t refcount = 0;
  bool valid = false;
  uint32_t slot = 0;
  uint64_t stamp = 0;
};

// What a process keeps about code it adopted (its sharee_method_map value)
// or published. `slot`/`stamp` identify the node binding it was taken from.
struct Adoption {
  HashId key;
  CodeHandle handle;
  uint32_t slot = 0;
  uint64_t stamp = 0;
};

enum class PublishOutcome { kInserted, kOverwrote, kMapFull };

struct PublishResult {
  PublishOutcome outcome = PublishOutcome::kMapFull;
  std::optional<CodeHandle> previous;
  uint32_t slot = 0;
  uint64_t stamp = 0;
};

// The global sharing map: hash-identification -> compiled code, with
// reference counts. Lives in the shared region; every operation runs under
// the region's single cross-process lock. One SharingMap object per attached
// process; it tracks whether that process currently holds the lock.
class SharingMap {
 public:
  explicit SharingMap(const SharedRegion& region);

  // Valid nodes only.
  std::optional<MapEntry> Lookup(const HashId& key);

  // Lookup + generation check + refcount increment + ledger record, as one
  // critical section. A stale generation or a full ledger is a miss.
  std::optional<Adoption> Adopt(const HashId& key, uint64_t pid, uint32_t adopter_segment);

  // Inserts, or overwrites an existing binding for the key ("newer wins"):
  // the node takes the new handle with refcount 0 and a new stamp, so holders
  // of the old binding fail their validity check.
  PublishResult Publish(const HashId& key, const CodeHandle& handle);

  // Drops one adoption. Throws InvariantViolation if `pid` never adopted it.
  void Release(const Adoption& adoption, uint64_t pid);

  // Marks the node invalid if it still binds `handle` (deoptimization).
  bool Invalidate(const HashId& key, const CodeHandle& handle);

  // Reclamation: every node whose code lies in `segment` stops resolving.
  size_t InvalidateSegment(uint32_t segment);

  // Owner-side collection step. If no process holds an adoption of `handle`,
  // removes the key's node when it still binds `handle` and returns true (the
  // caller may free the code). Otherwise returns false.
  bool TryRetire(const HashId& key, const CodeHandle& handle);

  // Number of unreleased adoptions of exactly this code.
  uint32_t RefCount(const CodeHandle& handle);

  // Releases every adoption recorded for `pid` (clean exit, or reclaim of a
  // dead owner's segment).
  size_t ReleaseAllFor(uint64_t pid);

  // Releases adoptions whose adopter is dead according to `is_dead`.
  size_t SweepDeadAdopters(const std::function<bool(uint64_t pid, uint32_t segment)>& is_dead);

  // Lock-free validity probe for the dispatch fast path: true while the slot
  // still carries the binding identified by `stamp`. Reads one atomic word.
  bool StillCurrent(uint32_t slot, uint64_t stamp) const;

  MapStatsRecord Stats();
  std::vector<MapEntry> Snapshot();
  std::vector<LedgerRecord> LedgerSnapshot();

  bool lock_held() const { return lock_depth_ > 0; }
  uint64_t lock_acquisitions() const { return lock_acquisitions_; }

 private:
  class Locked;

  MapNodeRecord* Nodes() const;
  CodeRefRecord* CodeRefs() const;
  LedgerRecord* Ledger() const;
  MapStatsRecord* StatsRecord() const;
  void AssertLocked() const;

  std::optional<uint32_t> FindNode(const HashId& key) const;
  std::optional<uint32_t> FindNodeByHandle(const CodeHandle& handle) const;
  CodeRefRecord* FindCodeRef(const CodeHandle& handle, bool create);
  void DropCodeRef(const CodeHandle& handle, uint32_t n);
  LedgerRecord* FindLedger(uint64_t pid, const CodeHandle& handle, bool create);
  void RemoveLedgerAdoption(LedgerRecord* rec, uint32_t n);

  const SharedRegion& region_;
  uint32_t map_capacity_;
  uint32_t coderef_capacity_;
  uint32_t ledger_capacity_;
  int lock_depth_ = 0;
  uint64_t lock_acquisitions_ = 0;
};

}  // namespace codeshare

#endif  // CODESHARE_MAP_SHARING_MAP_H_
