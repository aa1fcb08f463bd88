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

#ifndef CODESHARE_JIT_COMPILED_CODE_H_
#define CODESHARE_JIT_COMPILED_CODE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "codeshare/hash/hash_id.h"

namespace codeshare {

inline constexpr uint32_t kCompiledMagic = 0x4a46534du;  // "MSFJ"
inline constexpr uint16_t kCompiledVersion = 1;

enum CompiledFlags : uint16_t {
  kHasGuards = 1u << 0,
  kHasInlining = 1u << 1,
};

// Compiled code as it sits in a code arena: header, fast ops, then the list
// of inlined builtin symbols. Everything is little-endian and relative, so the
// same bytes run unchanged in any process that maps them.
struct CompiledHeader {
  uint32_t magic;
  uint16_t version;
  uint16_t flags;
  uint8_t source_hash[16];
  uint32_t total_length;  // bytes, header included
  uint32_t op_count;
  uint16_t num_registers;
  uint16_t arity;
  uint16_t inlined_count;
  uint16_t guard_count;
  uint32_t ops_offset;
  uint32_t inlined_offset;
  uint64_t compile_ns;  // J of the compiling process; sharees read it back
  uint64_t reserved;
};
static_assert(sizeof(CompiledHeader) == 64);

enum class FastKind : uint8_t {
  kConst,         // r[a] = imm
  kMove,          // r[a] = r[b]
  kAdd,           // r[a] = r[b] op r[c]
  kSub,
  kMul,
  kLt,
  kJump,          // pc += imm
  kJz,            // if r[a] == 0: pc += imm
  kInvoke,        // r[a] = call symbol b (virtual slots resolved on arg 0)
  kInvokeDirect,  // r[a] = call method symbol b; guard already checked
  kGuard,         // if resolve(b, r[a]) != c: deoptimize, pc += imm
  kClear,         // r[a .. a+b) = 0
  kRet,           // return r[a]
};

// Invokes pack up to four argument registers into `imm`, 16 bits each, and
// the count into `argc`.
struct FastOp {
  FastKind kind;
  uint8_t argc;
  uint16_t a;
  uint16_t b;
  uint16_t c;
  int64_t imm;
};
static_assert(sizeof(FastOp) == 16);

inline uint16_t PackedArg(const FastOp& op, size_t k) {
  return static_cast<uint16_t>(static_cast<uint64_t>(op.imm) >> (16 * k));
}

const char* FastKindName(FastKind kind);

// Validated read-only view over compiled code bytes.
class CompiledView {
 public:
  // Checks magic, version, lengths and, when `expected` is given, the source
  // hash. Returns a description of the first problem on failure.
  static std::optional<CompiledView> Open(const std::byte* bytes, size_t available,
                                          const HashId* expected, std::string* error);

  const CompiledHeader& header() const { return *header_; }
  std::span<const FastOp> ops() const { return ops_; }
  std::span<const uint16_t> inlined() const { return inlined_; }
  HashId source_hash() const;

 private:
  const CompiledHeader* header_ = nullptr;
  std::span<const FastOp> ops_;
  std::span<const uint16_t> inlined_;
};

// Human-readable listing of compiled code.
std::string Disassemble(const CompiledView& view);

}  // namespace codeshare

#endif  // CODESHARE_JIT_COMPILED_CODE_H_
