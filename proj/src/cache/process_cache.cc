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

#include "codeshare/cache/process_cache.h"

#include <algorithm>
#include <cstring>
#include <new>

#include "codeshare/common/check.h"

namespace codeshare {

namespace {

uint64_t AlignDown(uint64_t v) { return v / kArenaAlignment * kArenaAlignment; }

}  // namespace

ProcessCache::~ProcessCache() = default;

std::unique_ptr<ProcessCache> ProcessCache::ForSegment(const SharedRegion& region,
                                                       uint32_t segment, uint64_t generation,
                                                       uint64_t pid, const CacheSizing& sizing) {
  CS_CHECK(segment < region.segment_count(), "bad segment " << segment);
  std::unique_ptr<ProcessCache> cache(new ProcessCache());
  cache->region_ = &region;
  cache->segment_ = segment;
  cache->generation_ = generation;
  cache->pid_ = pid;
  cache->base_ = region.base();
  uint64_t half = region.segment_size() / 2;
  uint64_t per_arena = AlignDown(std::min(sizing.max_cache_bytes / 2, half));
  uint64_t seg_off = region.SegmentOffset(segment);
  cache->code_ = Arena(seg_off, sizing.initial_arena_bytes, per_arena);
  cache->data_ = Arena(seg_off + half, sizing.initial_arena_bytes, per_arena);
  return cache;
}

std::unique_ptr<ProcessCache> ProcessCache::Private(const CacheSizing& sizing,
                                                    const SharedRegion* region) {
  std::unique_ptr<ProcessCache> cache(new ProcessCache());
  cache->region_ = region;
  uint64_t per_arena = AlignDown(sizing.max_cache_bytes / 2);
  cache->private_buffer_ = std::make_unique<std::byte[]>(2 * per_arena);
  cache->base_ = cache->private_buffer_.get();
  cache->code_ = Arena(0, sizing.initial_arena_bytes, per_arena);
  cache->data_ = Arena(per_arena, sizing.initial_arena_bytes, per_arena);
  return cache;
}

void ProcessCache::CheckOwner() const {
  if (is_private()) return;
  uint64_t owner = region_->LoadOwner(segment_);
  if (owner != pid_ || region_->LoadGeneration(segment_) != generation_) {
    throw AccessViolation("process " + std::to_string(pid_) + " does not own segment " +
                          std::to_string(segment_) + " (owner " + std::to_string(owner) + ")");
  }
}

std::optional<CodeHandle> ProcessCache::AllocateCode(uint64_t size) {
  CheckOwner();
  auto offset = code_.Allocate(size);
  if (!offset) return std::nullopt;
  return CodeHandle{segment_, *offset, generation_};
}

std::optional<DataHandle> ProcessCache::AllocateData(uint64_t size) {
  CheckOwner();
  auto offset = data_.Allocate(size);
  if (!offset) return std::nullopt;
  return DataHandle{*offset, *data_.SizeOf(*offset)};
}

uint64_t ProcessCache::FreeCode(const CodeHandle& handle) {
  CheckOwner();
  CS_CHECK(Owns(handle), "free of a code handle this process does not own");
  uint64_t size = code_.Free(handle.offset);
  std::memset(base_ + handle.offset, kFreedCodeByte, size);
  return size;
}

uint64_t ProcessCache::FreeData(const DataHandle& handle) {
  CheckOwner();
  uint64_t size = data_.Free(handle.offset);
  std::memset(base_ + handle.offset, kFreedCodeByte, size);
  return size;
}

bool ProcessCache::Grow() {
  bool grew = code_.Grow();
  grew = data_.Grow() || grew;
  return grew;
}

std::byte* ProcessCache::MutableCode(const CodeHandle& handle) {
  CheckOwner();
  CS_CHECK(IsLive(handle), "write through a handle that is not a live own allocation");
  return base_ + handle.offset;
}

std::byte* ProcessCache::MutableData(const DataHandle& handle) {
  CheckOwner();
  CS_CHECK(data_.IsAllocated(handle.offset), "write to an unallocated data block");
  return base_ + handle.offset;
}

const std::byte* ProcessCache::Resolve(const CodeHandle& handle) const {
  if (handle.segment == segment_) return base_ + handle.offset;
  if (handle.is_private() || region_ == nullptr) return nullptr;
  if (handle.segment >= region_->segment_count()) return nullptr;
  return region_->base() + handle.offset;
}

}  // namespace codeshare
