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

#ifndef CODESHARE_JIT_PROFILE_H_
#define CODESHARE_JIT_PROFILE_H_

#include <cstdint>
#include <map>
#include <optional>

#include "codeshare/vm/bytecode.h"

namespace codeshare {

// Inline-cache analogue: for each call site through a virtual slot, the
// histogram of concrete callees observed by the interpreter.
class Profile {
 public:
  using Histogram = std::map<uint16_t, uint64_t>;

  void Record(uint32_t pc, uint16_t target) { ++sites_[pc][target]; }

  // The single callee seen at `pc`, if exactly one was seen.
  std::optional<uint16_t> MonomorphicTarget(uint32_t pc) const;

  const std::map<uint32_t, Histogram>& sites() const { return sites_; }
  uint64_t observations() const;

  // Bytes charged to the data arena for a profile of `def`: a fixed header
  // plus one inline-cache line per call site.
  static uint64_t DataBytes(const MethodDef& def);

 private:
  std::map<uint32_t, Histogram> sites_;
};

}  // namespace codeshare

#endif  // CODESHARE_JIT_PROFILE_H_
