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

#ifndef CODESHARE_CACHE_PROCESS_CACHE_H_
#define CODESHARE_CACHE_PROCESS_CACHE_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>

#include "codeshare/cache/arena.h"
#include "codeshare/cache/code_handle.h"
#include "codeshare/cache/region.h"

namespace codeshare {

inline constexpr uint8_t kFreedCodeByte = 0xdd;

struct CacheSizing {
  uint64_t initial_arena_bytes = 32 * 1024;
  // Cap on code + data together; each arena may grow to half of it. Clamped
  // to the segment size for segment-backed caches.
  uint64_t max_cache_bytes = 4u << 20;
};

// One process's JIT cache: a code arena and a data arena, either inside the
// process's own segment of the shared region or, when no segment could be
// claimed (or sharing is disabled), in private memory.
class ProcessCache {
 public:
  static std::unique_ptr<ProcessCache> ForSegment(const SharedRegion& region, uint32_t segment,
                                                  uint64_t generation, uint64_t pid,
                                                  const CacheSizing& sizing);
  // `region` may be null; when set, handles into other processes' segments
  // can still be resolved (never written).
  static std::unique_ptr<ProcessCache> Private(const CacheSizing& sizing,
                                               const SharedRegion* region);

  ~ProcessCache();
  ProcessCache(const ProcessCache&) = delete;
  ProcessCache& operator=(const ProcessCache&) = delete;

  bool is_private() const { return segment_ == kPrivateSegment; }
  uint32_t segment() const { return segment_; }
  uint64_t generation() const { return generation_; }
  uint64_t pid() const { return pid_; }

  std::optional<CodeHandle> AllocateCode(uint64_t size);
  std::optional<DataHandle> AllocateData(uint64_t size);
  // Both return the bytes released and poison the block.
  uint64_t FreeCode(const CodeHandle& handle);
  uint64_t FreeData(const DataHandle& handle);

  // Doubles both arenas together (clamped to the cap). False when both are
  // already at the cap.
  bool Grow();
  bool AtCap() const {
    return code_.capacity() >= code_.max_capacity() && data_.capacity() >= data_.max_capacity();
  }

  bool Owns(const CodeHandle& handle) const {
    return handle.segment == segment_ && handle.generation == generation_ &&
           code_.Contains(handle.offset);
  }
  bool IsLive(const CodeHandle& handle) const {
    return Owns(handle) && code_.IsAllocated(handle.offset);
  }

  std::byte* MutableCode(const CodeHandle& handle);
  std::byte* MutableData(const DataHandle& handle);
  // Resolves any handle: our own (private or segment) or one in another
  // process's segment. Returns nullptr if it cannot be resolved here.
  const std::byte* Resolve(const CodeHandle& handle) const;

  const Arena& code_arena() const { return code_; }
  const Arena& data_arena() const { return data_; }
  uint64_t code_bytes() const { return code_.used_bytes(); }
  uint64_t data_bytes() const { return data_.used_bytes(); }

 private:
  ProcessCache() = default;
  void CheckOwner() const;

  const SharedRegion* region_ = nullptr;
  uint32_t segment_ = kPrivateSegment;
  uint64_t generation_ = 0;
  uint64_t pid_ = 0;
  std::byte* base_ = nullptr;  // region base, or the private buffer
  std::unique_ptr<std::byte[]> private_buffer_;
  Arena code_;
  Arena data_;
};

}  // namespace codeshare

#endif  // CODESHARE_CACHE_PROCESS_CACHE_H_
