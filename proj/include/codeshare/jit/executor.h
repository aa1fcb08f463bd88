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

#ifndef CODESHARE_JIT_EXECUTOR_H_
#define CODESHARE_JIT_EXECUTOR_H_

#include <cstdint>
#include <span>

#include "codeshare/jit/compiled_code.h"
#include "codeshare/vm/interpreter.h"
#include "codeshare/vm/program.h"

namespace codeshare {

struct ExecResult {
  Value value = 0;
  // A type guard failed; the slow path produced `value`, and the caller is
  // expected to deoptimize the method.
  bool guard_failed = false;
  uint64_t steps = 0;
};

ExecResult ExecuteCompiled(const CompiledView& code, std::span<const Value> args,
                           const SymbolTable& symbols, CallSink& sink);

}  // namespace codeshare

#endif  // CODESHARE_JIT_EXECUTOR_H_
