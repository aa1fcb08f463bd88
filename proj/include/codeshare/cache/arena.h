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

#ifndef CODESHARE_CACHE_ARENA_H_
#define CODESHARE_CACHE_ARENA_H_

#include <cstdint>
#include <map>
#include <optional>

namespace codeshare {

inline constexpr uint64_t kArenaAlignment = 16;

// First-fit allocator over a window [base, base + capacity) of a larger
// reservation of `max_capacity` bytes. Offsets handed out are absolute
// (base-relative offsets plus base). The bookkeeping lives with the owner, not
// in the arena memory, since only the owner ever allocates or frees.
class Arena {
 public:
  Arena() = default;
  Arena(uint64_t base, uint64_t initial_capacity, uint64_t max_capacity);

  std::optional<uint64_t> Allocate(uint64_t size);
  // Returns the block size. Freeing an offset that is not allocated throws.
  uint64_t Free(uint64_t offset);

  // Doubles the logical capacity, clamped to max_capacity. False if already
  // at the cap.
  bool Grow();

  // Drops every allocation and returns to the initial capacity.
  void Reset();

  uint64_t base() const { return base_; }
  uint64_t capacity() const { return capacity_; }
  uint64_t max_capacity() const { return max_capacity_; }
  uint64_t used_bytes() const { return used_; }
  uint64_t free_bytes() const { return capacity_ - used_; }
  size_t allocation_count() const { return allocated_.size(); }
  bool IsAllocated(uint64_t offset) const { return allocated_.count(offset - base_) != 0; }
  std::optional<uint64_t> SizeOf(uint64_t offset) const;
  bool Contains(uint64_t offset) const {
    return offset >= base_ && offset < base_ + max_capacity_;
  }

 private:
  void InsertFree(uint64_t rel, uint64_t size);

  uint64_t base_ = 0;
  uint64_t initial_capacity_ = 0;
  uint64_t capacity_ = 0;
  uint64_t max_capacity_ = 0;
  uint64_t used_ = 0;
  std::map<uint64_t, uint64_t> free_;       // rel offset -> size
  std::map<uint64_t, uint64_t> allocated_;  // rel offset -> size
};

}  // namespace codeshare

#endif  // CODESHARE_CACHE_ARENA_H_
