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

#include "support/oracles.h"

#include <map>
#include <sstream>
#include <stdexcept>

namespace codeshare::testing {

namespace {

uint64_t Below(std::mt19937_64& rng, uint64_t n) { return n == 0 ? 0 : rng() % n; }

Value Wrap(unsigned __int128 v) { return static_cast<Value>(static_cast<uint64_t>(v)); }

struct RefMachine {
  const SymbolTable& symbols;
  uint64_t calls = 0;

  Value Run(uint16_t symbol, const std::vector<Value>& args, int depth) {
    if (depth > 4096) throw std::runtime_error("reference evaluator: recursion too deep");
    ++calls;
    const SymbolEntry& entry = symbols.at(symbol);
    if (entry.kind == SymbolEntry::Kind::kVirtual) {
      // Receiver is the first argument; the slot is its non-negative residue.
      const int64_t n = static_cast<int64_t>(entry.targets.size());
      int64_t r = args.empty() ? 0 : args[0] % n;
      if (r < 0) r += n;
      return Run(entry.targets[static_cast<size_t>(r)], args, depth);
    }
    const MethodDef& m = *entry.method;
    std::map<uint16_t, Value> regs;  // absent means zero
    for (uint16_t k = 0; k < m.arity && k < args.size(); ++k) regs[k] = args[k];
    auto get = [&](uint16_t r) {
      auto it = regs.find(r);
      return it == regs.end() ? Value{0} : it->second;
    };
    size_t pc = 0;
    uint64_t fuel = 50'000'000;
    while (fuel-- > 0) {
      const Instruction& in = m.code.at(pc);
      switch (in.op) {
        case Opcode::kLoadConst:
          regs[in.dst] = in.imm;
          pc += 1;
          break;
        case Opcode::kMove:
          regs[in.dst] = get(in.lhs);
          pc += 1;
          break;
        case Opcode::kAdd:
          regs[in.dst] = Wrap(static_cast<unsigned __int128>(static_cast<uint64_t>(get(in.lhs))) +
                              static_cast<uint64_t>(get(in.rhs)));
          pc += 1;
          break;
        case Opcode::kSub:
          regs[in.dst] = Wrap(static_cast<unsigned __int128>(static_cast<uint64_t>(get(in.lhs))) -
                              static_cast<uint64_t>(get(in.rhs)));
          pc += 1;
          break;
        case Opcode::kMul:
          regs[in.dst] = Wrap(static_cast<unsigned __int128>(static_cast<uint64_t>(get(in.lhs))) *
                              static_cast<uint64_t>(get(in.rhs)));
          pc += 1;
          break;
        case Opcode::kCmpLt:
          regs[in.dst] = get(in.lhs) < get(in.rhs);
          pc += 1;
          break;
        case Opcode::kJump:
          pc = in.target;
          break;
        case Opcode::kJumpIfZero:
          pc = get(in.dst) == 0 ? in.target : pc + 1;
          break;
        case Opcode::kInvokeSym: {
          std::vector<Value> out;
          for (uint8_t k = 0; k < in.argc; ++k) out.push_back(get(in.args[k]));
          regs[in.dst] = Run(in.symbol, out, depth + 1);
          pc += 1;
          break;
        }
        case Opcode::kReturn:
          return get(in.dst);
      }
    }
    throw std::runtime_error("reference evaluator: out of fuel");
  }
};

Instruction RandomArith(std::mt19937_64& rng, uint16_t regs) {
  auto r = [&] { return static_cast<uint16_t>(Below(rng, regs)); };
  switch (Below(rng, 6)) {
    case 0: {
      int64_t imm = static_cast<int64_t>(Below(rng, 101)) - 50;
      if (Below(rng, 8) == 0) imm = static_cast<int64_t>(rng());
      return Instruction::LoadConst(r(), imm);
    }
    case 1:
      return Instruction::Move(r(), r());
    case 2:
      return Instruction::Binary(Opcode::kAdd, r(), r(), r());
    case 3:
      return Instruction::Binary(Opcode::kSub, r(), r(), r());
    case 4:
      return Instruction::Binary(Opcode::kMul, r(), r(), r());
    default:
      return Instruction::Binary(Opcode::kCmpLt, r(), r(), r());
  }
}

}  // namespace

RefResult RefEval(const SymbolTable& symbols, uint16_t symbol, std::span<const Value> args) {
  RefMachine m{symbols};
  RefResult r;
  r.value = m.Run(symbol, std::vector<Value>(args.begin(), args.end()), 0);
  r.calls = m.calls;
  return r;
}

std::string CanonicalText(const MethodDef& def) {
  std::ostringstream os;
  os << def.signature.size() << ':' << def.signature << '|';
  for (const Instruction& in : def.code) {
    switch (in.op) {
      case Opcode::kLoadConst:
        os << "C" << in.dst << "," << in.imm;
        break;
      case Opcode::kMove:
        os << "M" << in.dst << "," << in.lhs;
        break;
      case Opcode::kAdd:
        os << "A" << in.dst << "," << in.lhs << "," << in.rhs;
        break;
      case Opcode::kSub:
        os << "S" << in.dst << "," << in.lhs << "," << in.rhs;
        break;
      case Opcode::kMul:
        os << "X" << in.dst << "," << in.lhs << "," << in.rhs;
        break;
      case Opcode::kCmpLt:
        os << "L" << in.dst << "," << in.lhs << "," << in.rhs;
        break;
      case Opcode::kJump:
        os << "J" << in.target;
        break;
      case Opcode::kJumpIfZero:
        os << "Z" << in.dst << "," << in.target;
        break;
      case Opcode::kInvokeSym:
        os << "I" << in.symbol << "," << in.dst << "," << int{in.argc};
        for (uint8_t k = 0; k < in.argc; ++k) os << "," << in.args[k];
        break;
      case Opcode::kReturn:
        os << "R" << in.dst;
        break;
    }
    os << ';';
  }
  return os.str();
}

double OracleF(const CostRecord& r, uint64_t st, uint64_t ht) {
  const double hc = static_cast<double>(r.HC);
  const double s = r.S;
  const double dt = (r.Ti && r.Tc) ? *r.Ti - *r.Tc : 0.0;
  if (hc < static_cast<double>(st)) return 0.0;
  if (hc < static_cast<double>(ht)) return -r.H - r.L + s * dt * (hc - static_cast<double>(st));
  return -r.H - r.L + s * dt * static_cast<double>(ht - st) + s * r.J;
}

double OracleY(const std::vector<CostRecord>& records, uint64_t st, uint64_t ht) {
  double y = 0;
  for (const CostRecord& r : records) {
    if (r.HC >= st) y += OracleF(r, st, ht);
  }
  return y;
}

ProgramDesc RandomProgram(uint64_t seed, const RandomProgramOptions& o) {
  std::mt19937_64 rng(seed);
  ProgramDesc desc;
  std::vector<SymbolEntry>& out = desc.framework;

  for (int b = 0; b < o.builtins; ++b) {
    auto def = std::make_shared<MethodDef>();
    def->arity = static_cast<uint16_t>(1 + Below(rng, 2));
    def->signature = "b" + std::to_string(out.size()) + "/" + std::to_string(def->arity);
    def->num_registers = static_cast<uint16_t>(def->arity + 2);
    def->is_builtin = true;
    int n = 1 + static_cast<int>(Below(rng, 4));
    for (int k = 0; k < n; ++k) def->code.push_back(RandomArith(rng, def->num_registers));
    def->code.push_back(Instruction::Return(static_cast<uint16_t>(Below(rng, def->num_registers))));
    SymbolEntry e;
    e.name = def->signature;
    e.arity = def->arity;
    e.in_framework = true;
    e.method = std::move(def);
    out.push_back(std::move(e));
  }

  int virtuals = 0;
  for (int mi = 0; mi < o.methods; ++mi) {
    auto def = std::make_shared<MethodDef>();
    def->arity = static_cast<uint16_t>(Below(rng, 4));
    def->signature = "m" + std::to_string(out.size()) + "/" + std::to_string(def->arity);
    const uint16_t g = static_cast<uint16_t>(def->arity + 3);  // general registers
    const uint16_t rt = g, rc = g + 1, rn = g + 2, rone = g + 3;
    def->num_registers = static_cast<uint16_t>(g + 4);
    auto& code = def->code;
    const int target_ops = 3 + static_cast<int>(Below(rng, static_cast<uint64_t>(o.max_ops)));
    int calls = 0;
    int loops = 0;
    while (static_cast<int>(code.size()) < target_ops) {
      uint64_t pick = Below(rng, 10);
      if (pick < 5) {
        code.push_back(RandomArith(rng, g));
      } else if (pick == 5 && o.loops && loops < 2) {
        ++loops;
        code.push_back(Instruction::LoadConst(rc, 0));
        code.push_back(Instruction::LoadConst(rn, static_cast<int64_t>(1 + Below(rng, 4))));
        code.push_back(Instruction::LoadConst(rone, 1));
        uint16_t head = static_cast<uint16_t>(code.size());
        code.push_back(Instruction::Binary(Opcode::kCmpLt, rt, rc, rn));
        size_t exit_jump = code.size();
        code.push_back(Instruction::JumpIfZero(rt, 0));
        int body = 1 + static_cast<int>(Below(rng, 4));
        for (int k = 0; k < body; ++k) code.push_back(RandomArith(rng, g));
        code.push_back(Instruction::Binary(Opcode::kAdd, rc, rc, rone));
        code.push_back(Instruction::Jump(head));
        code[exit_jump].target = static_cast<uint16_t>(code.size());
      } else if (pick < 8 && calls < o.max_calls && !out.empty()) {
        ++calls;
        uint16_t callee = static_cast<uint16_t>(Below(rng, out.size()));
        Instruction in;
        in.op = Opcode::kInvokeSym;
        in.symbol = callee;
        in.argc = static_cast<uint8_t>(out[callee].arity);
        for (uint8_t k = 0; k < in.argc; ++k) in.args[k] = static_cast<uint16_t>(Below(rng, g));
        in.dst = static_cast<uint16_t>(Below(rng, g));
        code.push_back(in);
      } else if (pick == 8) {
        size_t skip = code.size();
        code.push_back(Instruction::JumpIfZero(static_cast<uint16_t>(Below(rng, g)), 0));
        int body = 1 + static_cast<int>(Below(rng, 3));
        for (int k = 0; k < body; ++k) code.push_back(RandomArith(rng, g));
        code[skip].target = static_cast<uint16_t>(code.size());
      } else {
        code.push_back(RandomArith(rng, g));
      }
    }
    code.push_back(Instruction::Return(static_cast<uint16_t>(Below(rng, g))));
    SymbolEntry e;
    e.name = def->signature;
    e.arity = def->arity;
    e.in_framework = true;
    e.method = std::move(def);
    out.push_back(std::move(e));

    // A virtual slot over earlier methods of one arity, when there are two.
    if (virtuals < o.virtuals && Below(rng, 3) == 0) {
      std::map<uint16_t, std::vector<uint16_t>> by_arity;
      for (size_t i = 0; i < out.size(); ++i) {
        if (out[i].IsMethod() && out[i].arity >= 1) {
          by_arity[out[i].arity].push_back(static_cast<uint16_t>(i));
        }
      }
      for (auto& [arity, ids] : by_arity) {
        if (ids.size() < 2) continue;
        SymbolEntry v;
        v.kind = SymbolEntry::Kind::kVirtual;
        v.arity = arity;
        v.name = "v" + std::to_string(out.size()) + "/" + std::to_string(arity);
        v.in_framework = true;
        size_t n = std::min<size_t>(ids.size(), 2 + Below(rng, 2));
        for (size_t k = 0; k < n; ++k) v.targets.push_back(ids[ids.size() - 1 - k]);
        out.push_back(std::move(v));
        ++virtuals;
        break;
      }
    }
  }
  return desc;
}

MethodDef RandomMethod(std::mt19937_64& rng, const std::string& name, uint16_t arity) {
  MethodDef def;
  def.arity = arity;
  def.signature = name + "/" + std::to_string(arity);
  def.num_registers = static_cast<uint16_t>(arity + 4);
  int n = 2 + static_cast<int>(Below(rng, 30));
  for (int k = 0; k < n; ++k) {
    uint64_t pick = Below(rng, 10);
    if (pick < 7) {
      def.code.push_back(RandomArith(rng, def.num_registers));
    } else if (pick == 7) {
      def.code.push_back(Instruction::JumpIfZero(static_cast<uint16_t>(Below(rng, 4)),
                                                 static_cast<uint16_t>(Below(rng, n + 1))));
    } else {
      Instruction in;
      in.op = Opcode::kInvokeSym;
      in.symbol = static_cast<uint16_t>(Below(rng, 64));
      in.argc = static_cast<uint8_t>(Below(rng, kMaxInvokeArgs + 1));
      for (uint8_t a = 0; a < in.argc; ++a) in.args[a] = static_cast<uint16_t>(Below(rng, 4));
      in.dst = static_cast<uint16_t>(Below(rng, 4));
      def.code.push_back(in);
    }
  }
  def.code.push_back(Instruction::Return(static_cast<uint16_t>(Below(rng, def.num_registers))));
  return def;
}

MethodDef Mutate(const MethodDef& def, std::mt19937_64& rng) {
  const std::string before = CanonicalText(def);
  for (;;) {
    MethodDef m = def;
    size_t at = Below(rng, m.code.size());
    Instruction& in = m.code[at];
    switch (Below(rng, 7)) {
      case 0:  // immediate
        if (in.op == Opcode::kLoadConst) {
          in.imm += static_cast<int64_t>(1 + Below(rng, 3)) * (Below(rng, 2) ? 1 : -1);
          if (Below(rng, 4) == 0) in.imm ^= int64_t{1} << Below(rng, 64);
        }
        break;
      case 1:  // destination register
        in.dst = static_cast<uint16_t>(in.dst + 1 + Below(rng, 3));
        break;
      case 2:  // binary opcode
        if (in.op == Opcode::kAdd || in.op == Opcode::kSub || in.op == Opcode::kMul ||
            in.op == Opcode::kCmpLt) {
          static const Opcode kOps[] = {Opcode::kAdd, Opcode::kSub, Opcode::kMul, Opcode::kCmpLt};
          in.op = kOps[Below(rng, 4)];
        }
        break;
      case 3:  // signature
        m.signature = m.signature.substr(0, m.signature.rfind('/')) + "x" +
                      m.signature.substr(m.signature.rfind('/'));
        break;
      case 4:  // insertion
        m.code.insert(m.code.begin() + static_cast<std::ptrdiff_t>(at),
                      RandomArith(rng, m.num_registers));
        break;
      case 5:  // deletion
        if (m.code.size() > 1) m.code.erase(m.code.begin() + static_cast<std::ptrdiff_t>(at));
        break;
      default:  // call target, source operand or branch target
        if (in.op == Opcode::kInvokeSym) {
          in.symbol = static_cast<uint16_t>(in.symbol + 1);
        } else if (in.IsBranch()) {
          in.target = static_cast<uint16_t>(in.target + 1);
        } else {
          in.lhs = static_cast<uint16_t>(in.lhs + 1);
        }
        break;
    }
    if (CanonicalText(m) != before) return m;
  }
}

}  // namespace codeshare::testing
