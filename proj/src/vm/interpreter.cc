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

#include "codeshare/vm/interpreter.h"

#include <algorithm>
#include <array>
#include <string>
#include <vector>

namespace codeshare {

namespace {

[[noreturn]] void Fault(const MethodDef& def, size_t pc, const std::string& what) {
  throw RuntimeFault(def.signature + " pc " + std::to_string(pc) + ": " + what);
}

}  // namespace

InterpResult Interpret(const MethodDef& def, std::span<const Value> args,
                       const SymbolTable& symbols, CallSink& sink, Profile* profile) {
  std::vector<Value> regs(def.num_registers, 0);
  auto reg = [&](size_t pc, uint16_t r) -> Value& {
    if (r >= regs.size()) Fault(def, pc, "register r" + std::to_string(r) + " out of range");
    return regs[r];
  };
  size_t n = std::min<size_t>(args.size(), def.arity);
  std::copy_n(args.begin(), n, regs.begin());

  InterpResult result;
  std::array<Value, kMaxInvokeArgs> out{};
  size_t pc = 0;
  for (;;) {
    if (pc >= def.code.size()) Fault(def, pc, "pc out of bounds");
    const Instruction& insn = def.code[pc];
    ++result.steps;
    switch (insn.op) {
      case Opcode::kLoadConst:
        reg(pc, insn.dst) = insn.imm;
        ++pc;
        break;
      case Opcode::kMove:
        reg(pc, insn.dst) = reg(pc, insn.lhs);
        ++pc;
        break;
      case Opcode::kAdd:
        reg(pc, insn.dst) = static_cast<Value>(static_cast<uint64_t>(reg(pc, insn.lhs)) +
                                               static_cast<uint64_t>(reg(pc, insn.rhs)));
        ++pc;
        break;
      case Opcode::kSub:
        reg(pc, insn.dst) = static_cast<Value>(static_cast<uint64_t>(reg(pc, insn.lhs)) -
                                               static_cast<uint64_t>(reg(pc, insn.rhs)));
        ++pc;
        break;
      case Opcode::kMul:
        reg(pc, insn.dst) = static_cast<Value>(static_cast<uint64_t>(reg(pc, insn.lhs)) *
                                               static_cast<uint64_t>(reg(pc, insn.rhs)));
        ++pc;
        break;
      case Opcode::kCmpLt:
        reg(pc, insn.dst) = reg(pc, insn.lhs) < reg(pc, insn.rhs) ? 1 : 0;
        ++pc;
        break;
      case Opcode::kJump:
        if (insn.target <= pc) ++result.back_edges;
        pc = insn.target;
        break;
      case Opcode::kJumpIfZero:
        if (reg(pc, insn.dst) == 0) {
          if (insn.target <= pc) ++result.back_edges;
          pc = insn.target;
        } else {
          ++pc;
        }
        break;
      case Opcode::kInvokeSym: {
        if (insn.symbol >= symbols.size()) Fault(def, pc, "dangling symbol");
        for (size_t k = 0; k < insn.argc; ++k) out[k] = reg(pc, insn.args[k]);
        uint16_t target = symbols.ResolveTarget(insn.symbol, insn.argc ? out[0] : 0);
        if (profile != nullptr && target != insn.symbol) {
          profile->Record(static_cast<uint32_t>(pc), target);
        }
        Value v = sink.Call(target, std::span<const Value>(out.data(), insn.argc));
        reg(pc, insn.dst) = v;
        ++pc;
        break;
      }
      case Opcode::kReturn:
        result.value = reg(pc, insn.dst);
        return result;
      default:
        Fault(def, pc, "bad opcode");
    }
  }
}

}  // namespace codeshare
