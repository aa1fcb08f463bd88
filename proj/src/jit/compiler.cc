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

#include "codeshare/jit/compiler.h"

#include <algorithm>
#include <cstring>
#include <optional>

#include "codeshare/common/check.h"
#include "codeshare/common/clock.h"
#include "codeshare/jit/compiled_code.h"

namespace codeshare {

namespace {

constexpr size_t kMaxFastOps = 1u << 20;

FastKind ArithKind(Opcode op) {
  switch (op) {
    case Opcode::kAdd: return FastKind::kAdd;
    case Opcode::kSub: return FastKind::kSub;
    case Opcode::kMul: return FastKind::kMul;
    case Opcode::kCmpLt: return FastKind::kLt;
    default: break;
  }
  CS_CHECK(false, "not an arithmetic opcode");
  return FastKind::kAdd;
}

int64_t PackArgs(const std::array<uint16_t, kMaxInvokeArgs>& regs, size_t argc) {
  uint64_t packed = 0;
  for (size_t k = 0; k < argc; ++k) packed |= uint64_t{regs[k]} << (16 * k);
  return static_cast<int64_t>(packed);
}

class Lowering {
 public:
  Lowering(const SymbolTable& symbols, const CompileOptions& options)
      : symbols_(symbols), options_(options) {}

  void Run(const MethodDef& def, const Profile* profile) {
    reg_top_ = def.num_registers;
    LowerBody(def, 0, 0, std::nullopt, profile);
  }

  std::vector<FastOp>& ops() { return ops_; }
  std::vector<uint16_t>& inlined() { return inlined_; }
  uint16_t guards() const { return guards_; }
  uint32_t registers() const { return reg_top_; }

 private:
  size_t Emit(FastKind kind, uint16_t a = 0, uint16_t b = 0, uint16_t c = 0, int64_t imm = 0,
              uint8_t argc = 0) {
    CS_CHECK(ops_.size() < kMaxFastOps, "compiled body too large");
    ops_.push_back(FastOp{kind, argc, a, b, c, imm});
    return ops_.size() - 1;
  }

  void PatchTo(size_t at, size_t target) {
    ops_[at].imm = static_cast<int64_t>(target) - static_cast<int64_t>(at);
  }

  uint16_t Reg(uint32_t base, uint16_t r) const {
    uint32_t renamed = base + r;
    CS_CHECK(renamed <= 0xffff, "register renaming overflow");
    return static_cast<uint16_t>(renamed);
  }

  bool CanInline(uint16_t symbol, int depth) const {
    const SymbolEntry& e = symbols_.at(symbol);
    if (!options_.inline_builtins || !e.IsMethod() || !e.method->is_builtin) return false;
    if (depth >= options_.max_inline_depth) return false;
    if (std::find(stack_.begin(), stack_.end(), symbol) != stack_.end()) return false;
    return uint64_t{reg_top_} + e.method->num_registers <= 0xffff;
  }

  // `ret_dst` set: we are inlined; RET becomes a move into the caller's
  // register and a jump past the inlined body.
  void LowerBody(const MethodDef& m, uint32_t base, int depth, std::optional<uint16_t> ret_dst,
                 const Profile* profile) {
    std::vector<size_t> start(m.code.size());
    std::vector<std::pair<size_t, uint16_t>> branch_fixups;
    std::vector<size_t> exit_jumps;
    for (size_t pc = 0; pc < m.code.size(); ++pc) {
      const Instruction& insn = m.code[pc];
      start[pc] = ops_.size();
      switch (insn.op) {
        case Opcode::kLoadConst:
          Emit(FastKind::kConst, Reg(base, insn.dst), 0, 0, insn.imm);
          break;
        case Opcode::kMove:
          Emit(FastKind::kMove, Reg(base, insn.dst), Reg(base, insn.lhs));
          break;
        case Opcode::kAdd:
        case Opcode::kSub:
        case Opcode::kMul:
        case Opcode::kCmpLt:
          Emit(ArithKind(insn.op), Reg(base, insn.dst), Reg(base, insn.lhs),
               Reg(base, insn.rhs));
          break;
        case Opcode::kJump:
          branch_fixups.emplace_back(Emit(FastKind::kJump), insn.target);
          break;
        case Opcode::kJumpIfZero:
          branch_fixups.emplace_back(Emit(FastKind::kJz, Reg(base, insn.dst)), insn.target);
          break;
        case Opcode::kInvokeSym:
          LowerInvoke(insn, static_cast<uint32_t>(pc), base, depth, profile);
          break;
        case Opcode::kReturn:
          if (ret_dst) {
            Emit(FastKind::kMove, *ret_dst, Reg(base, insn.dst));
            exit_jumps.push_back(Emit(FastKind::kJump));
          } else {
            Emit(FastKind::kRet, Reg(base, insn.dst));
          }
          break;
      }
    }
    for (auto [at, target] : branch_fixups) PatchTo(at, start[target]);
    for (size_t at : exit_jumps) PatchTo(at, ops_.size());
  }

  void LowerInvoke(const Instruction& insn, uint32_t pc, uint32_t base, int depth,
                   const Profile* profile) {
    std::array<uint16_t, kMaxInvokeArgs> args{};
    for (size_t k = 0; k < insn.argc; ++k) args[k] = Reg(base, insn.args[k]);
    uint16_t dst = Reg(base, insn.dst);
    const SymbolEntry& e = symbols_.at(insn.symbol);
    if (e.IsMethod()) {
      if (CanInline(insn.symbol, depth)) {
        Inline(insn.symbol, args, insn.argc, dst, depth);
      } else {
        Emit(FastKind::kInvoke, dst, insn.symbol, 0, PackArgs(args, insn.argc), insn.argc);
      }
      return;
    }
    std::optional<uint16_t> mono;
    if (options_.emit_guards && profile != nullptr) mono = profile->MonomorphicTarget(pc);
    if (!mono) {
      Emit(FastKind::kInvoke, dst, insn.symbol, 0, PackArgs(args, insn.argc), insn.argc);
      return;
    }
    size_t guard = Emit(FastKind::kGuard, args[0], insn.symbol, *mono);
    ++guards_;
    if (CanInline(*mono, depth)) {
      Inline(*mono, args, insn.argc, dst, depth);
    } else {
      Emit(FastKind::kInvokeDirect, dst, *mono, 0, PackArgs(args, insn.argc), insn.argc);
    }
    size_t done = Emit(FastKind::kJump);
    PatchTo(guard, ops_.size());
    Emit(FastKind::kInvoke, dst, insn.symbol, 0, PackArgs(args, insn.argc), insn.argc);
    PatchTo(done, ops_.size());
  }

  void Inline(uint16_t symbol, const std::array<uint16_t, kMaxInvokeArgs>& args, size_t argc,
              uint16_t dst, int depth) {
    const MethodDef& callee = *symbols_.at(symbol).method;
    uint32_t base = reg_top_;
    reg_top_ += callee.num_registers;
    Emit(FastKind::kClear, Reg(base, 0), callee.num_registers);
    for (size_t k = 0; k < argc && k < callee.arity; ++k) {
      Emit(FastKind::kMove, Reg(base, static_cast<uint16_t>(k)), args[k]);
    }
    if (std::find(inlined_.begin(), inlined_.end(), symbol) == inlined_.end()) {
      inlined_.push_back(symbol);
    }
    stack_.push_back(symbol);
    LowerBody(callee, base, depth + 1, dst, nullptr);
    stack_.pop_back();
  }

  const SymbolTable& symbols_;
  const CompileOptions& options_;
  std::vector<FastOp> ops_;
  std::vector<uint16_t> inlined_;
  std::vector<uint16_t> stack_;
  uint32_t reg_top_ = 0;
  uint16_t guards_ = 0;
};

}  // namespace

CompileOutput Compile(const MethodDef& def, const HashId& source_hash, const Profile* profile,
                      const SymbolTable& symbols, const CompileOptions& options) {
  uint64_t t0 = NowNs();
  Lowering lowering(symbols, options);
  lowering.Run(def, profile);

  CompileOutput out;
  out.inlined = lowering.inlined();
  out.guard_count = lowering.guards();
  out.op_count = static_cast<uint32_t>(lowering.ops().size());

  CompiledHeader h{};
  h.magic = kCompiledMagic;
  h.version = kCompiledVersion;
  h.flags = static_cast<uint16_t>((out.guard_count ? kHasGuards : 0) |
                                  (out.inlined.empty() ? 0 : kHasInlining));
  std::memcpy(h.source_hash, source_hash.digest.data(), source_hash.digest.size());
  h.num_registers = static_cast<uint16_t>(lowering.registers());
  h.arity = def.arity;
  h.inlined_count = static_cast<uint16_t>(out.inlined.size());
  h.guard_count = out.guard_count;
  h.op_count = out.op_count;
  h.ops_offset = sizeof(CompiledHeader);
  h.inlined_offset = h.ops_offset + out.op_count * sizeof(FastOp);
  size_t inlined_bytes = out.inlined.size() * sizeof(uint16_t);
  h.total_length = static_cast<uint32_t>((h.inlined_offset + inlined_bytes + 15) / 16 * 16);

  out.bytes.assign(h.total_length, std::byte{0});
  std::memcpy(out.bytes.data() + h.ops_offset, lowering.ops().data(),
              out.op_count * sizeof(FastOp));
  if (inlined_bytes) {
    std::memcpy(out.bytes.data() + h.inlined_offset, out.inlined.data(), inlined_bytes);
  }
  out.lowering_ns = NowNs() - t0;
  h.compile_ns = out.lowering_ns;
  std::memcpy(out.bytes.data(), &h, sizeof(h));
  return out;
}

}  // namespace codeshare
