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

#include "codeshare/vm/bytecode.h"

#include <charconv>
#include <sstream>

namespace codeshare {

const char* OpcodeName(Opcode op) {
  switch (op) {
    case Opcode::kLoadConst: return "CONST";
    case Opcode::kMove: return "MOV";
    case Opcode::kAdd: return "ADD";
    case Opcode::kSub: return "SUB";
    case Opcode::kMul: return "MUL";
    case Opcode::kCmpLt: return "LT";
    case Opcode::kJump: return "JMP";
    case Opcode::kJumpIfZero: return "JMPZ";
    case Opcode::kInvokeSym: return "INVOKE";
    case Opcode::kReturn: return "RET";
  }
  return "???";
}

Instruction Instruction::LoadConst(uint16_t dst, int64_t value) {
  Instruction i;
  i.op = Opcode::kLoadConst;
  i.dst = dst;
  i.imm = value;
  return i;
}

Instruction Instruction::Move(uint16_t dst, uint16_t src) {
  Instruction i;
  i.op = Opcode::kMove;
  i.dst = dst;
  i.lhs = src;
  return i;
}

Instruction Instruction::Binary(Opcode op, uint16_t dst, uint16_t lhs, uint16_t rhs) {
  Instruction i;
  i.op = op;
  i.dst = dst;
  i.lhs = lhs;
  i.rhs = rhs;
  return i;
}

Instruction Instruction::Jump(uint16_t target) {
  Instruction i;
  i.op = Opcode::kJump;
  i.target = target;
  return i;
}

Instruction Instruction::JumpIfZero(uint16_t cond, uint16_t target) {
  Instruction i;
  i.op = Opcode::kJumpIfZero;
  i.dst = cond;
  i.target = target;
  return i;
}

Instruction Instruction::Invoke(uint16_t symbol, std::initializer_list<uint16_t> args,
                                uint16_t dst) {
  Instruction i;
  i.op = Opcode::kInvokeSym;
  i.symbol = symbol;
  i.dst = dst;
  i.argc = static_cast<uint8_t>(args.size());
  size_t k = 0;
  for (uint16_t a : args) {
    if (k < kMaxInvokeArgs) i.args[k] = a;
    ++k;
  }
  return i;
}

Instruction Instruction::Return(uint16_t src) {
  Instruction i;
  i.op = Opcode::kReturn;
  i.dst = src;
  return i;
}

bool operator==(const Instruction& a, const Instruction& b) {
  if (a.op != b.op) return false;
  switch (a.op) {
    case Opcode::kLoadConst:
      return a.dst == b.dst && a.imm == b.imm;
    case Opcode::kMove:
      return a.dst == b.dst && a.lhs == b.lhs;
    case Opcode::kAdd:
    case Opcode::kSub:
    case Opcode::kMul:
    case Opcode::kCmpLt:
      return a.dst == b.dst && a.lhs == b.lhs && a.rhs == b.rhs;
    case Opcode::kJump:
      return a.target == b.target;
    case Opcode::kJumpIfZero:
      return a.dst == b.dst && a.target == b.target;
    case Opcode::kInvokeSym:
      if (a.symbol != b.symbol || a.dst != b.dst || a.argc != b.argc) return false;
      for (size_t k = 0; k < a.argc; ++k) {
        if (a.args[k] != b.args[k]) return false;
      }
      return true;
    case Opcode::kReturn:
      return a.dst == b.dst;
  }
  return false;
}

std::optional<uint16_t> ArityFromSignature(std::string_view signature) {
  size_t slash = signature.rfind('/');
  if (slash == std::string_view::npos || slash == 0 || slash + 1 >= signature.size()) {
    return std::nullopt;
  }
  unsigned value = 0;
  const char* first = signature.data() + slash + 1;
  const char* last = signature.data() + signature.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || value > kMaxInvokeArgs) {
    return std::nullopt;
  }
  return static_cast<uint16_t>(value);
}

std::optional<std::string> CheckMethodShape(const MethodDef& def) {
  std::ostringstream err;
  if (def.code.empty()) {
    return def.signature + ": empty code";
  }
  if (def.code.size() >= kMaxCodeLength) {
    return def.signature + ": code too long";
  }
  auto arity = ArityFromSignature(def.signature);
  if (!arity || *arity != def.arity) {
    return def.signature + ": signature does not carry the method arity";
  }
  if (def.arity > def.num_registers) {
    return def.signature + ": fewer registers than parameters";
  }
  if (Opcode last = def.code.back().op; last != Opcode::kReturn && last != Opcode::kJump) {
    return def.signature + ": control can fall off the end";
  }
  auto reg_ok = [&](uint16_t r) { return r < def.num_registers; };
  for (size_t pc = 0; pc < def.code.size(); ++pc) {
    const Instruction& insn = def.code[pc];
    bool ok = true;
    switch (insn.op) {
      case Opcode::kLoadConst:
        ok = reg_ok(insn.dst);
        break;
      case Opcode::kMove:
        ok = reg_ok(insn.dst) && reg_ok(insn.lhs);
        break;
      case Opcode::kAdd:
      case Opcode::kSub:
      case Opcode::kMul:
      case Opcode::kCmpLt:
        ok = reg_ok(insn.dst) && reg_ok(insn.lhs) && reg_ok(insn.rhs);
        break;
      case Opcode::kJump:
        ok = insn.target < def.code.size();
        break;
      case Opcode::kJumpIfZero:
        ok = reg_ok(insn.dst) && insn.target < def.code.size();
        break;
      case Opcode::kInvokeSym:
        ok = reg_ok(insn.dst) && insn.argc <= kMaxInvokeArgs;
        for (size_t k = 0; ok && k < insn.argc; ++k) ok = reg_ok(insn.args[k]);
        break;
      case Opcode::kReturn:
        ok = reg_ok(insn.dst);
        break;
      default:
        ok = false;
    }
    if (!ok) {
      err << def.signature << ": bad operand at pc " << pc << " (" << OpcodeName(insn.op) << ")";
      return err.str();
    }
  }
  return std::nullopt;
}

std::string FormatInstruction(const Instruction& insn, size_t pc) {
  std::ostringstream os;
  auto rel = [&](uint16_t target) {
    long delta = static_cast<long>(target) - static_cast<long>(pc);
    std::ostringstream r;
    if (delta >= 0) r << '+';
    r << delta;
    return r.str();
  };
  os << OpcodeName(insn.op);
  switch (insn.op) {
    case Opcode::kLoadConst:
      os << " r" << insn.dst << ' ' << insn.imm;
      break;
    case Opcode::kMove:
      os << " r" << insn.dst << " r" << insn.lhs;
      break;
    case Opcode::kAdd:
    case Opcode::kSub:
    case Opcode::kMul:
    case Opcode::kCmpLt:
      os << " r" << insn.dst << " r" << insn.lhs << " r" << insn.rhs;
      break;
    case Opcode::kJump:
      os << ' ' << rel(insn.target);
      break;
    case Opcode::kJumpIfZero:
      os << " r" << insn.dst << ' ' << rel(insn.target);
      break;
    case Opcode::kInvokeSym:
      os << ' ' << insn.symbol;
      for (size_t k = 0; k < insn.argc; ++k) os << " r" << insn.args[k];
      os << " -> r" << insn.dst;
      break;
    case Opcode::kReturn:
      os << " r" << insn.dst;
      break;
  }
  return os.str();
}

}  // namespace codeshare
