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

#include "codeshare/jit/profile.h"

namespace codeshare {

namespace {

constexpr uint64_t kProfileHeaderBytes = 32;
constexpr uint64_t kInlineCacheLineBytes = 32;

}  // namespace

std::optional<uint16_t> Profile::MonomorphicTarget(uint32_t pc) const {
  auto it = sites_.find(pc);
  if (it == sites_.end() || it->second.size() != 1) return std::nullopt;
  return it->second.begin()->first;
}

uint64_t Profile::observations() const {
  uint64_t n = 0;
  for (const auto& [pc, hist] : sites_) {
    for (const auto& [target, count] : hist) n += count;
  }
  return n;
}

uint64_t Profile::DataBytes(const MethodDef& def) {
  uint64_t sites = 0;
  for (const Instruction& insn : def.code) {
    if (insn.op == Opcode::kInvokeSym) ++sites;
  }
  return kProfileHeaderBytes + sites * kInlineCacheLineBytes;
}

}  // namespace codeshare
