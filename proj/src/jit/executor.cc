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

#include "codeshare/jit/executor.h"

#include <algorithm>
#include <array>
#include <vector>

#include "codeshare/common/check.h"

namespace codeshare {

namespace {

constexpr size_t kInlineRegisters = 32;

inline Value Wrap(uint64_t v) { return static_cast<Value>(v); }

}  // namespace

ExecResult ExecuteCompiled(const CompiledView& code, std::span<const Value> args,
                           const SymbolTable& symbols, CallSink& sink) {
  const CompiledHeader& h = code.header();
  std::array<Value, kInlineRegisters> small{};
  std::vector<Value> large;
  Value* r = small.data();
  if (h.num_registers > kInlineRegisters) {
    large.assign(h.num_registers, 0);
    r = large.data();
  }
  size_t n = std::min<size_t>(args.size(), h.arity);
  std::copy_n(args.begin(), n, r);

  const FastOp* ops = code.ops().data();
  const size_t count = code.ops().size();
  ExecResult result;
  std::array<Value, kMaxInvokeArgs> out{};
  size_t pc = 0;
  for (;;) {
    CS_CHECK(pc < count, "compiled code ran off its end");
    const FastOp& op = ops[pc];
    ++result.steps;
    switch (op.kind) {
      case FastKind::kConst:
        r[op.a] = op.imm;
        ++pc;
        break;
      case FastKind::kMove:
        r[op.a] = r[op.b];
        ++pc;
        break;
      case FastKind::kAdd:
        r[op.a] = Wrap(static_cast<uint64_t>(r[op.b]) + static_cast<uint64_t>(r[op.c]));
        ++pc;
        break;
      case FastKind::kSub:
        r[op.a] = Wrap(static_cast<uint64_t>(r[op.b]) - static_cast<uint64_t>(r[op.c]));
        ++pc;
        break;
      case FastKind::kMul:
        r[op.a] = Wrap(static_cast<uint64_t>(r[op.b]) * static_cast<uint64_t>(r[op.c]));
        ++pc;
        break;
      case FastKind::kLt:
        r[op.a] = r[op.b] < r[op.c] ? 1 : 0;
        ++pc;
        break;
      case FastKind::kJump:
        pc = static_cast<size_t>(static_cast<int64_t>(pc) + op.imm);
        break;
      case FastKind::kJz:
        pc = r[op.a] == 0 ? static_cast<size_t>(static_cast<int64_t>(pc) + op.imm) : pc + 1;
        break;
      case FastKind::kInvoke:
      case FastKind::kInvokeDirect: {
        for (size_t k = 0; k < op.argc; ++k) out[k] = r[PackedArg(op, k)];
        uint16_t target = op.b;
        if (op.kind == FastKind::kInvoke) {
          target = symbols.ResolveTarget(op.b, op.argc ? out[0] : 0);
        }
        r[op.a] = sink.Call(target, std::span<const Value>(out.data(), op.argc));
        ++pc;
        break;
      }
      case FastKind::kGuard:
        if (symbols.ResolveTarget(op.b, r[op.a]) != op.c) {
          result.guard_failed = true;
          pc = static_cast<size_t>(static_cast<int64_t>(pc) + op.imm);
        } else {
          ++pc;
        }
        break;
      case FastKind::kClear:
        std::fill_n(r + op.a, op.b, 0);
        ++pc;
        break;
      case FastKind::kRet:
        result.value = r[op.a];
        return result;
    }
  }
}

}  // namespace codeshare
