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

#ifndef CODESHARE_JIT_COMPILER_H_
#define CODESHARE_JIT_COMPILER_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "codeshare/hash/hash_id.h"
#include "codeshare/jit/profile.h"
#include "codeshare/vm/program.h"

namespace codeshare {

struct CompileOptions {
  // Builtins only; app methods and non-builtin framework methods always stay
  // symbolic invokes.
  bool inline_builtins = true;
  int max_inline_depth = 3;
  // One type guard per call site whose profile saw a single callee.
  bool emit_guards = true;
};

struct CompileOutput {
  std::vector<std::byte> bytes;  // a complete CompiledHeader-led block
  std::vector<uint16_t> inlined;
  uint16_t guard_count = 0;
  uint32_t op_count = 0;
  uint64_t lowering_ns = 0;
};

// Lowers `def` to the fast form. `profile` may be null.
CompileOutput Compile(const MethodDef& def, const HashId& source_hash, const Profile* profile,
                      const SymbolTable& symbols, const CompileOptions& options = {});

}  // namespace codeshare

#endif  // CODESHARE_JIT_COMPILER_H_
