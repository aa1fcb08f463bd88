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

#include "codeshare/cache/region.h"

#include <fcntl.h>
#include <signal.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <cstring>

#include "codeshare/common/check.h"

namespace codeshare {

static_assert(std::endian::native == std::endian::little,
              "region layout is little-endian and read in place");

namespace {

constexpr uint64_t kHeaderArea = 128;
constexpr uint64_t kPage = 4096;

uint64_t AlignUp(uint64_t v, uint64_t a) { return (v + a - 1) / a * a; }

std::string ErrnoText(const std::string& what) {
  return what + ": " + std::strerror(errno);
}

}  // namespace

bool OsProcessAlive(uint64_t pid) {
  if (pid == 0) return false;
  if (::kill(static_cast<pid_t>(pid), 0) == 0) return true;
  return errno == EPERM;
}

void SharedRegion::ValidateConfig(const RegionConfig& config) {
  if (config.segment_count == 0 || config.segment_count > kMaxSegments) {
    throw RegionError("segment count must be in 1.." + std::to_string(kMaxSegments) + ", got " +
                      std::to_string(config.segment_count));
  }
  if (config.segment_size < 2 * kPage || config.segment_size % kPage != 0) {
    throw RegionError("segment size must be a multiple of 4096 and at least 8192 bytes");
  }
  if (config.map_capacity == 0 || config.ledger_capacity == 0 || config.coderef_capacity == 0) {
    throw RegionError("sharing-map capacities must be non-zero");
  }
}

uint64_t SharedRegion::LayoutSize(const RegionConfig& config, RegionHeader* h) {
  ValidateConfig(config);
  RegionHeader header{};
  header.magic = kRegionMagic;
  header.version = kRegionVersion;
  header.segment_count = config.segment_count;
  header.segment_size = config.segment_size;
  header.map_capacity = config.map_capacity;
  header.ledger_capacity = config.ledger_capacity;
  header.coderef_capacity = config.coderef_capacity;
  uint64_t off = kHeaderArea;
  header.segment_table_offset = off;
  off += kMaxSegments * sizeof(SegmentRecord);
  off = AlignUp(off, 64);
  header.lock_offset = off;
  off += AlignUp(sizeof(pthread_mutex_t), 64);
  header.stats_offset = off;
  off += kMapStatsSize;
  header.map_offset = off;
  off += uint64_t{config.map_capacity} * kMapNodeSize;
  header.coderef_offset = off;
  off += uint64_t{config.coderef_capacity} * kCodeRefSize;
  header.ledger_offset = off;
  off += uint64_t{config.ledger_capacity} * kLedgerEntrySize;
  off = AlignUp(off, kPage);
  header.segments_offset = off;
  off += uint64_t{config.segment_count} * config.segment_size;
  header.total_size = off;
  if (h != nullptr) *h = header;
  return off;
}

void SharedRegion::Initialize(std::byte* base, const RegionHeader& header) {
  std::memcpy(base, &header, sizeof(header));
  auto* table = reinterpret_cast<SegmentRecord*>(base + header.segment_table_offset);
  for (uint32_t i = 0; i < kMaxSegments; ++i) {
    table[i] = SegmentRecord{0, 0, 1};
  }
  auto* mutex = reinterpret_cast<pthread_mutex_t*>(base + header.lock_offset);
  pthread_mutexattr_t attr;
  pthread_mutexattr_init(&attr);
  pthread_mutexattr_setpshared(&attr, PTHREAD_PROCESS_SHARED);
  pthread_mutexattr_setrobust(&attr, PTHREAD_MUTEX_ROBUST);
  int rc = pthread_mutex_init(mutex, &attr);
  pthread_mutexattr_destroy(&attr);
  if (rc != 0) throw RegionError("pthread_mutex_init failed");
}

SharedRegion::SharedRegion(std::byte* base, uint64_t size, int fd, std::string path)
    : base_(base), size_(size), fd_(fd), path_(std::move(path)) {}

SharedRegion::~SharedRegion() {
  if (base_ != nullptr) ::munmap(base_, size_);
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<SharedRegion> SharedRegion::CreateFile(const std::string& path,
                                                       const RegionConfig& config) {
  RegionHeader header;
  uint64_t size = LayoutSize(config, &header);
  int fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_EXCL | O_CLOEXEC, 0600);
  if (fd < 0) {
    if (errno == EEXIST) throw RegionError("region already exists: " + path);
    throw RegionError(ErrnoText("cannot create region " + path));
  }
  if (::ftruncate(fd, static_cast<off_t>(size)) != 0) {
    std::string msg = ErrnoText("cannot size region " + path);
    ::close(fd);
    ::unlink(path.c_str());
    throw RegionError(msg);
  }
  void* addr = ::mmap(nullptr, size, PROT_READ | PROT_WRITE, MAP_SHARED, fd, 0);
  if (addr == MAP_FAILED) {
    std::string msg = ErrnoText("cannot map region " + path);
    ::close(fd);
    ::unlink(path.c_str());
    throw RegionError(msg);
  }
  auto* base = static_cast<std::byte*>(addr);
  Initialize(base, header);
  return std::unique_ptr<SharedRegion>(new SharedRegion(base, size, fd, path));
}

std::unique_ptr<SharedRegion> SharedRegion::OpenFile(const std::string& path) {
  int fd = ::open(path.c_str(), O_RDWR | O_CLOEXEC);
  if (fd < 0) throw RegionError(ErrnoText("region missing: " + path));
  struct stat st;
  if (::fstat(fd, &st) != 0 || static_cast<uint64_t>(st.st_size) < sizeof(RegionHeader)) {
    ::close(fd);
    throw RegionError("region file too small: " + path);
  }
  RegionHeader header;
  if (::pread(fd, &header, sizeof(header), 0) != static_cast<ssize_t>(sizeof(header)) ||
      header.magic != kRegionMagic || header.version != kRegionVersion ||
      header.total_size != static_cast<uint64_t>(st.st_size)) {
    ::close(fd);
    throw RegionError("not a region file (bad magic, version or size): " + path);
  }
  void* addr = ::mmap(nullptr, header.total_size, PROT_READ | PROT_WRITE, MAP_SHARED, fd, 0);
  if (addr == MAP_FAILED) {
    std::string msg = ErrnoText("cannot map region " + path);
    ::close(fd);
    throw RegionError(msg);
  }
  return std::unique_ptr<SharedRegion>(
      new SharedRegion(static_cast<std::byte*>(addr), header.total_size, fd, path));
}

std::unique_ptr<SharedRegion> SharedRegion::CreateAnonymous(const RegionConfig& config) {
  RegionHeader header;
  uint64_t size = LayoutSize(config, &header);
  void* addr =
      ::mmap(nullptr, size, PROT_READ | PROT_WRITE, MAP_SHARED | MAP_ANONYMOUS, -1, 0);
  if (addr == MAP_FAILED) throw RegionError(ErrnoText("cannot map anonymous region"));
  auto* base = static_cast<std::byte*>(addr);
  Initialize(base, header);
  return std::unique_ptr<SharedRegion>(new SharedRegion(base, size, -1, ""));
}

SegmentRecord& SharedRegion::segment_record(uint32_t index) const {
  CS_CHECK(index < header().segment_count, "segment index " << index << " out of range");
  return reinterpret_cast<SegmentRecord*>(base_ + header().segment_table_offset)[index];
}

std::optional<uint32_t> SharedRegion::SegmentOf(uint64_t offset) const {
  const RegionHeader& h = header();
  if (offset < h.segments_offset || offset >= h.total_size) return std::nullopt;
  return static_cast<uint32_t>((offset - h.segments_offset) / h.segment_size);
}

uint64_t SharedRegion::LoadOwner(uint32_t index) const {
  return std::atomic_ref<uint64_t>(segment_record(index).owner_pid).load(std::memory_order_acquire);
}

uint64_t SharedRegion::LoadBeacon(uint32_t index) const {
  return std::atomic_ref<uint64_t>(segment_record(index).beacon).load(std::memory_order_acquire);
}

uint64_t SharedRegion::LoadGeneration(uint32_t index) const {
  return std::atomic_ref<uint64_t>(segment_record(index).generation)
      .load(std::memory_order_acquire);
}

void SharedRegion::StoreBeacon(uint32_t index, uint64_t beacon) const {
  std::atomic_ref<uint64_t>(segment_record(index).beacon).store(beacon, std::memory_order_release);
}

uint64_t SharedRegion::ContentDigest() const {
  const RegionHeader& h = header();
  uint64_t digest = 0xcbf29ce484222325ull;
  const auto* p = reinterpret_cast<const uint8_t*>(base_);
  for (uint64_t i = h.stats_offset; i < h.total_size; ++i) {
    digest = (digest ^ p[i]) * 0x100000001b3ull;
  }
  return digest;
}

bool SegmentOwnerDead(const SharedRegion& region, uint32_t index, uint64_t now,
                      const LivenessPolicy& liveness) {
  uint64_t owner = region.LoadOwner(index);
  if (owner == 0) return false;  // unclaimed, not dead
  uint64_t beacon = region.LoadBeacon(index);
  if (beacon == 0) return true;  // clean exit
  if (liveness.probe && !liveness.probe(owner)) return true;
  if (liveness.beacon_timeout != 0 && now > beacon && now - beacon > liveness.beacon_timeout) {
    return true;
  }
  return false;
}

Attachment AttachSegment(const SharedRegion& region, uint64_t pid, uint64_t now,
                         const LivenessPolicy& liveness,
                         const std::function<void(uint32_t, uint64_t)>& on_reclaim) {
  CS_CHECK(pid != 0, "pid 0 is reserved for unowned segments");
  CS_CHECK(now != 0, "beacon value 0 is reserved for clean exit");
  const uint32_t count = region.segment_count();
  for (uint32_t i = 0; i < count; ++i) {
    uint64_t expected = 0;
    std::atomic_ref<uint64_t> owner(region.segment_record(i).owner_pid);
    if (owner.load(std::memory_order_acquire) == 0 &&
        owner.compare_exchange_strong(expected, pid, std::memory_order_acq_rel)) {
      region.StoreBeacon(i, now);
      return Attachment{AttachKind::kClaimed, i, region.LoadGeneration(i), 0};
    }
  }
  for (uint32_t i = 0; i < count; ++i) {
    if (!SegmentOwnerDead(region, i, now, liveness)) continue;
    std::atomic_ref<uint64_t> owner(region.segment_record(i).owner_pid);
    uint64_t dead = owner.load(std::memory_order_acquire);
    if (dead == 0 || dead == pid) continue;
    if (!owner.compare_exchange_strong(dead, pid, std::memory_order_acq_rel)) continue;
    uint64_t generation = std::atomic_ref<uint64_t>(region.segment_record(i).generation)
                              .fetch_add(1, std::memory_order_acq_rel) +
                          1;
    if (on_reclaim) on_reclaim(i, dead);
    region.StoreBeacon(i, now);
    return Attachment{AttachKind::kReclaimed, i, generation, dead};
  }
  return Attachment{AttachKind::kPrivateFallback, 0, 0, 0};
}

}  // namespace codeshare
