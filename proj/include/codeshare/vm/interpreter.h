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

#ifndef CODESHARE_VM_INTERPRETER_H_
#define CODESHARE_VM_INTERPRETER_H_

#include <cstdint>
#include <span>
#include <stdexcept>

#include "codeshare/jit/profile.h"
#include "codeshare/vm/program.h"

namespace codeshare {

// Where calls out of executing code go. Both the interpreter and compiled
// code hand every non-inlined call to the runtime, which dispatches it.
class CallSink {
 public:
  virtual ~CallSink() = default;
  // Calls concrete method `symbol` (never a virtual slot).
  virtual Value Call(uint16_t symbol, std::span<const Value> args) = 0;
};

class RuntimeFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InterpResult {
  Value value = 0;
  uint64_t back_edges = 0;  // taken jumps to a pc <= the jump's own pc
  uint64_t steps = 0;
};

// Executes one invocation of `def` by decoding each instruction. Registers
// start at zero with the arguments in r0..r(arity-1). When `profile` is set,
// the concrete callee of every call through a virtual slot is recorded.
InterpResult Interpret(const MethodDef& def, std::span<const Value> args,
                       const SymbolTable& symbols, CallSink& sink, Profile* profile);

}  // namespace codeshare

#endif  // CODESHARE_VM_INTERPRETER_H_
