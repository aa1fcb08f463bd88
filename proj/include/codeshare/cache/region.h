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

#ifndef CODESHARE_CACHE_REGION_H_
#define CODESHARE_CACHE_REGION_H_

#include <pthread.h>

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

namespace codeshare {

inline constexpr uint32_t kMaxSegments = 64;
inline constexpr uint64_t kRegionMagic = 0x31544a5248534343ull;  // "CCSHRJT1"
inline constexpr uint32_t kRegionVersion = 1;

// Record sizes of the sharing-map areas; the map module static_asserts its
// structs against these.
inline constexpr uint64_t kMapNodeSize = 64;
inline constexpr uint64_t kCodeRefSize = 32;
inline constexpr uint64_t kLedgerEntrySize = 64;
inline constexpr uint64_t kMapStatsSize = 128;

class RegionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RegionConfig {
  uint32_t segment_count = 4;
  uint64_t segment_size = 1u << 20;
  uint32_t map_capacity = 4096;
  uint32_t ledger_capacity = 16384;
  uint32_t coderef_capacity = 8192;
};

// Fixed little-endian layout at offset 0 of the region.
struct RegionHeader {
  uint64_t magic;
  uint32_t version;
  uint32_t segment_count;
  uint64_t segment_size;
  uint32_t map_capacity;
  uint32_t ledger_capacity;
  uint32_t coderef_capacity;
  uint32_t reserved0;
  uint64_t segment_table_offset;
  uint64_t lock_offset;
  uint64_t stats_offset;
  uint64_t map_offset;
  uint64_t coderef_offset;
  uint64_t ledger_offset;
  uint64_t segments_offset;
  uint64_t total_size;
  uint64_t reserved1;
};
static_assert(sizeof(RegionHeader) == 112);

// Per-segment ownership record. owner_pid == 0 means never claimed; a
// beacon of 0 means the owner exited cleanly.
struct SegmentRecord {
  uint64_t owner_pid;
  uint64_t beacon;
  uint64_t generation;
};
static_assert(sizeof(SegmentRecord) == 24);

// Answers whether a process id still refers to a running worker.
using LivenessProbe = std::function<bool(uint64_t pid)>;

// Real workers: kill(pid, 0).
bool OsProcessAlive(uint64_t pid);

struct LivenessPolicy {
  LivenessProbe probe;
  // When non-zero, a beacon older than this many clock units is dead too.
  uint64_t beacon_timeout = 0;
};

// The shared region: header, segment table, the sharing-map areas and the
// segments themselves, in one file-backed (or anonymous shared) mapping.
// Every cross-region reference is an offset from base().
class SharedRegion {
 public:
  ~SharedRegion();
  SharedRegion(const SharedRegion&) = delete;
  SharedRegion& operator=(const SharedRegion&) = delete;

  // Creates and initializes a region backed by `path`. Fails if the file
  // exists, if the config is out of range, or on I/O errors.
  static std::unique_ptr<SharedRegion> CreateFile(const std::string& path,
                                                  const RegionConfig& config);
  // Maps an existing region file created by CreateFile.
  static std::unique_ptr<SharedRegion> OpenFile(const std::string& path);
  // Anonymous MAP_SHARED region: visible to forked children, and to all
  // simulated processes of the current one.
  static std::unique_ptr<SharedRegion> CreateAnonymous(const RegionConfig& config);

  static void ValidateConfig(const RegionConfig& config);
  static uint64_t LayoutSize(const RegionConfig& config, RegionHeader* header_out);

  std::byte* base() const { return base_; }
  uint64_t size() const { return size_; }
  const std::string& path() const { return path_; }

  const RegionHeader& header() const { return *reinterpret_cast<const RegionHeader*>(base_); }
  uint32_t segment_count() const { return header().segment_count; }
  uint64_t segment_size() const { return header().segment_size; }

  SegmentRecord& segment_record(uint32_t index) const;
  uint64_t SegmentOffset(uint32_t index) const {
    return header().segments_offset + uint64_t{index} * header().segment_size;
  }
  // Index of the segment containing `offset`, if any.
  std::optional<uint32_t> SegmentOf(uint64_t offset) const;

  uint64_t LoadOwner(uint32_t index) const;
  uint64_t LoadBeacon(uint32_t index) const;
  uint64_t LoadGeneration(uint32_t index) const;
  void StoreBeacon(uint32_t index, uint64_t beacon) const;

  pthread_mutex_t* map_lock() const {
    return reinterpret_cast<pthread_mutex_t*>(base_ + header().lock_offset);
  }

  template <typename T>
  T* At(uint64_t offset) const {
    return reinterpret_cast<T*>(base_ + offset);
  }

  // FNV-1a digest of everything past the segment table (map statistics,
  // nodes, ledger, segments). Tests compare it before and after a run.
  uint64_t ContentDigest() const;

 private:
  SharedRegion(std::byte* base, uint64_t size, int fd, std::string path);
  static void Initialize(std::byte* base, const RegionHeader& header);

  std::byte* base_ = nullptr;
  uint64_t size_ = 0;
  int fd_ = -1;
  std::string path_;
};

enum class AttachKind { kClaimed, kReclaimed, kPrivateFallback };

struct Attachment {
  AttachKind kind = AttachKind::kPrivateFallback;
  uint32_t segment = 0;
  uint64_t generation = 0;
  uint64_t previous_owner = 0;  // kReclaimed only
};

// Claims a segment for `pid`: the first never-claimed segment, else the first
// segment whose owner is dead (its generation is bumped before the claim is
// visible to the new owner, and `on_reclaim` runs so the sharing map can drop
// the dead owner's nodes), else a private fallback.
Attachment AttachSegment(const SharedRegion& region, uint64_t pid, uint64_t now,
                         const LivenessPolicy& liveness,
                         const std::function<void(uint32_t segment, uint64_t dead_pid)>& on_reclaim);

// True if the segment's current owner counts as dead under `liveness`.
bool SegmentOwnerDead(const SharedRegion& region, uint32_t index, uint64_t now,
                      const LivenessPolicy& liveness);

}  // namespace codeshare

#endif  // CODESHARE_CACHE_REGION_H_
