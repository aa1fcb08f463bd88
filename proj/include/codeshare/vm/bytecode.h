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

#ifndef CODESHARE_VM_BYTECODE_H_
#define CODESHARE_VM_BYTECODE_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace codeshare {

using Value = int64_t;

inline constexpr size_t kMaxInvokeArgs = 4;
inline constexpr size_t kMaxCodeLength = 1u << 16;

enum class Opcode : uint8_t {
  kLoadConst = 0,
  kMove = 1,
  kAdd = 2,
  kSub = 3,
  kMul = 4,
  kCmpLt = 5,
  kJump = 6,
  kJumpIfZero = 7,
  kInvokeSym = 8,
  kReturn = 9,
};

inline constexpr uint8_t kOpcodeCount = 10;

const char* OpcodeName(Opcode op);

// One register-machine instruction. Which fields are meaningful depends on
// the opcode:
//   LoadConst  dst <- imm
//   Move       dst <- lhs
//   Add..CmpLt dst <- lhs op rhs
//   Jump       pc  <- target
//   JumpIfZero if dst == 0: pc <- target
//   InvokeSym  dst <- call symbol(args[0..argc))
//   Return     return dst
// Jump targets are absolute instruction indices.
struct Instruction {
  Opcode op = Opcode::kReturn;
  uint16_t dst = 0;
  uint16_t lhs = 0;
  uint16_t rhs = 0;
  int64_t imm = 0;
  uint16_t target = 0;
  uint16_t symbol = 0;
  uint8_t argc = 0;
  std::array<uint16_t, kMaxInvokeArgs> args{};

  static Instruction LoadConst(uint16_t dst, int64_t value);
  static Instruction Move(uint16_t dst, uint16_t src);
  static Instruction Binary(Opcode op, uint16_t dst, uint16_t lhs, uint16_t rhs);
  static Instruction Jump(uint16_t target);
  static Instruction JumpIfZero(uint16_t cond, uint16_t target);
  static Instruction Invoke(uint16_t symbol, std::initializer_list<uint16_t> args, uint16_t dst);
  static Instruction Return(uint16_t src);

  bool IsBranch() const { return op == Opcode::kJump || op == Opcode::kJumpIfZero; }

  friend bool operator==(const Instruction& a, const Instruction& b);
};

struct MethodDef {
  std::string signature;  // "<qualified name>/<arity>"
  uint16_t arity = 0;
  uint16_t num_registers = 0;
  bool is_builtin = false;
  std::vector<Instruction> code;

  // Identity for sharing purposes: signature and code. Register count and the
  // builtin flag are load-time attributes, not part of the method's identity.
  friend bool operator==(const MethodDef& a, const MethodDef& b) {
    return a.signature == b.signature && a.code == b.code;
  }
};

// Returns a description of the first structural problem, if any: empty code,
// register operands out of range, out-of-bounds jump targets, a last
// instruction that is neither RET nor JMP, or an arity that does not match the
// signature suffix.
std::optional<std::string> CheckMethodShape(const MethodDef& def);

// Parses the arity suffix of "<name>/<arity>".
std::optional<uint16_t> ArityFromSignature(std::string_view signature);

// Renders one instruction in the program-file syntax (relative jumps).
std::string FormatInstruction(const Instruction& insn, size_t pc);

}  // namespace codeshare

#endif  // CODESHARE_VM_BYTECODE_H_
