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

#ifndef CODESHARE_CACHE_CODE_HANDLE_H_
#define CODESHARE_CACHE_CODE_HANDLE_H_

#include <cstdint>
#include <functional>

namespace codeshare {

// Segment index used for handles into a process-private cache.
inline constexpr uint32_t kPrivateSegment = 0xffffffffu;

// Cross-process locator of compiled code. `offset` is relative to the base of
// the shared region (or of the private cache for kPrivateSegment), never an
// absolute address. A generation that differs from the segment's current
// generation means the segment was reclaimed and the handle is stale.
struct CodeHandle {
  uint32_t segment = kPrivateSegment;
  uint64_t offset = 0;
  uint64_t generation = 0;

  bool is_private() const { return segment == kPrivateSegment; }

  friend bool operator==(const CodeHandle&, const CodeHandle&) = default;
  friend auto operator<=>(const CodeHandle&, const CodeHandle&) = default;
};

// Block in a process's data arena (profiles, compiled-method metadata). Data
// blocks are never shared, so no generation is needed.
struct DataHandle {
  uint64_t offset = 0;
  uint64_t size = 0;

  friend bool operator==(const DataHandle&, const DataHandle&) = default;
};

struct CodeHandleHasher {
  size_t operator()(const CodeHandle& h) const {
    uint64_t x = h.offset * 0x9e3779b97f4a7c15ull ^ (uint64_t{h.segment} << 32) ^ h.generation;
    return static_cast<size_t>(x ^ (x >> 29));
  }
};

}  // namespace codeshare

#endif  // CODESHARE_CACHE_CODE_HANDLE_H_
