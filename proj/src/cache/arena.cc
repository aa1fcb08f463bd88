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

#include "codeshare/cache/arena.h"

#include <algorithm>

#include "codeshare/common/check.h"

namespace codeshare {

Arena::Arena(uint64_t base, uint64_t initial_capacity, uint64_t max_capacity)
    : base_(base),
      initial_capacity_(std::min(initial_capacity, max_capacity)),
      capacity_(initial_capacity_),
      max_capacity_(max_capacity) {
  CS_CHECK(base % kArenaAlignment == 0, "misaligned arena base");
  if (capacity_ > 0) free_.emplace(0, capacity_);
}

void Arena::InsertFree(uint64_t rel, uint64_t size) {
  auto next = free_.lower_bound(rel);
  if (next != free_.end() && rel + size == next->first) {
    size += next->second;
    next = free_.erase(next);
  }
  if (next != free_.begin()) {
    auto prev = std::prev(next);
    if (prev->first + prev->second == rel) {
      prev->second += size;
      return;
    }
  }
  free_.emplace(rel, size);
}

std::optional<uint64_t> Arena::Allocate(uint64_t size) {
  if (size == 0) size = 1;
  uint64_t rounded = (size + kArenaAlignment - 1) / kArenaAlignment * kArenaAlignment;
  for (auto it = free_.begin(); it != free_.end(); ++it) {
    if (it->second < rounded) continue;
    uint64_t rel = it->first;
    uint64_t remaining = it->second - rounded;
    free_.erase(it);
    if (remaining > 0) free_.emplace(rel + rounded, remaining);
    allocated_.emplace(rel, rounded);
    used_ += rounded;
    return base_ + rel;
  }
  return std::nullopt;
}

uint64_t Arena::Free(uint64_t offset) {
  CS_CHECK(offset >= base_, "offset below arena");
  auto it = allocated_.find(offset - base_);
  CS_CHECK(it != allocated_.end(), "free of unallocated block at " << offset);
  uint64_t rel = it->first;
  uint64_t size = it->second;
  allocated_.erase(it);
  used_ -= size;
  InsertFree(rel, size);
  return size;
}

bool Arena::Grow() {
  if (capacity_ >= max_capacity_) return false;
  uint64_t next = std::min(std::max<uint64_t>(capacity_ * 2, kArenaAlignment), max_capacity_);
  InsertFree(capacity_, next - capacity_);
  capacity_ = next;
  return true;
}

void Arena::Reset() {
  free_.clear();
  allocated_.clear();
  used_ = 0;
  capacity_ = initial_capacity_;
  if (capacity_ > 0) free_.emplace(0, capacity_);
}

std::optional<uint64_t> Arena::SizeOf(uint64_t offset) const {
  if (offset < base_) return std::nullopt;
  auto it = allocated_.find(offset - base_);
  if (it == allocated_.end()) return std::nullopt;
  return it->second;
}

}  // namespace codeshare
