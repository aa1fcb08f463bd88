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

#ifndef CODESHARE_VM_PROGRAM_H_
#define CODESHARE_VM_PROGRAM_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "codeshare/vm/bytecode.h"

namespace codeshare {

class ProgramError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr size_t kMaxVirtualTargets = 8;

// A symbol-table entry is either a concrete method or a virtual slot. A
// virtual slot picks one of its concrete targets from the receiver, i.e. the
// first argument: target = targets[receiver mod targets.size()]. That gives
// call sites a runtime-varying callee to build inline caches over.
struct SymbolEntry {
  enum class Kind : uint8_t { kMethod, kVirtual };

  Kind kind = Kind::kMethod;
  std::string name;  // "<qualified name>/<arity>"
  uint16_t arity = 0;
  bool in_framework = false;
  std::shared_ptr<const MethodDef> method;  // kMethod only
  std::vector<uint16_t> targets;            // kVirtual only

  bool IsMethod() const { return kind == Kind::kMethod; }
};

// Parsed but unresolved program description. Each section keeps its entries
// in file order; symbolic indices are assigned at load time.
struct ProgramDesc {
  std::vector<SymbolEntry> framework;
  std::vector<SymbolEntry> app;
};

// Grammar (one directive per line, '#' starts a comment):
//   framework | app                            -- section switch
//   method <name>/<arity> regs=<n> builtin=<0|1>
//     CONST r<d> <int>    MOV r<d> r<s>        ADD|SUB|MUL|LT r<d> r<a> r<b>
//     JMP <+/-off>        JMPZ r<c> <+/-off>   INVOKE <sym> r<a>.. -> r<d>
//     RET r<s>
//     .repeat <n> ... .end                     -- body lines expanded n times
//   virtual <name>/<arity> targets=<sym>,<sym>,...
// Throws ProgramError with the origin and line number on malformed input.
ProgramDesc ParseProgram(std::string_view text, std::string_view origin = "<input>");

// Renders a description back to program-file syntax.
std::string FormatProgram(const ProgramDesc& desc);

// Per-process symbol table: framework entries first (indices identical in
// every process that loads the same framework file), then app entries.
class SymbolTable {
 public:
  SymbolTable() = default;

  size_t size() const { return entries_.size(); }
  size_t framework_size() const { return framework_size_; }
  const SymbolEntry& at(uint16_t index) const { return entries_.at(index); }
  const std::vector<SymbolEntry>& entries() const { return entries_; }

  std::optional<uint16_t> Find(std::string_view name) const;

  // Concrete target of a call to `symbol` whose first argument is `receiver`.
  uint16_t ResolveTarget(uint16_t symbol, Value receiver) const {
    const SymbolEntry& e = entries_[symbol];
    if (e.IsMethod()) return symbol;
    int64_t n = static_cast<int64_t>(e.targets.size());
    int64_t slot = ((receiver % n) + n) % n;
    return e.targets[static_cast<size_t>(slot)];
  }

 private:
  friend SymbolTable LoadProgram(const ProgramDesc&, const ProgramDesc&);

  std::vector<SymbolEntry> entries_;
  size_t framework_size_ = 0;
  std::unordered_map<std::string, uint16_t> by_name_;
};

// Builds the symbol table from a framework description and an app description
// (the framework section of `app` and the app section of `framework` must be
// empty). Validates every method's shape and resolves every symbolic index:
// dangling indices, arity mismatches, builtins outside the framework, and
// virtual slots naming non-methods are errors.
SymbolTable LoadProgram(const ProgramDesc& framework, const ProgramDesc& app);

// Convenience: a single description carrying both sections.
SymbolTable LoadProgram(const ProgramDesc& whole);

}  // namespace codeshare

#endif  // CODESHARE_VM_PROGRAM_H_
