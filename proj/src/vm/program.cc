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

#include "codeshare/vm/program.h"

#include <charconv>
#include <sstream>

namespace codeshare {

namespace {

std::vector<std::string_view> SplitWords(std::string_view line) {
  std::vector<std::string_view> words;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) words.push_back(line.substr(start, i - start));
  }
  return words;
}

class LineParser {
 public:
  LineParser(std::string_view origin, size_t line) : origin_(origin), line_(line) {}

  [[noreturn]] void Fail(const std::string& what) const {
    std::ostringstream os;
    os << origin_ << ":" << line_ << ": " << what;
    throw ProgramError(os.str());
  }

  int64_t Int(std::string_view word) const {
    int64_t value = 0;
    std::string_view digits = word;
    if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size()) {
      Fail("expected integer, got '" + std::string(word) + "'");
    }
    return value;
  }

  uint16_t Register(std::string_view word) const {
    if (word.size() < 2 || word[0] != 'r') {
      Fail("expected register, got '" + std::string(word) + "'");
    }
    int64_t r = Int(word.substr(1));
    if (r < 0 || r > 0xffff) Fail("register index out of range");
    return static_cast<uint16_t>(r);
  }

  uint16_t JumpTarget(std::string_view word, size_t pc) const {
    if (word.empty() || (word[0] != '+' && word[0] != '-')) {
      Fail("jump offsets are relative and signed, got '" + std::string(word) + "'");
    }
    int64_t target = static_cast<int64_t>(pc) + Int(word);
    if (target < 0 || target >= static_cast<int64_t>(kMaxCodeLength)) {
      Fail("jump target out of range");
    }
    return static_cast<uint16_t>(target);
  }

  // Parses "key=value" and returns value, failing if the key differs.
  std::string_view KeyValue(std::string_view word, std::string_view key) const {
    if (word.size() <= key.size() || word.substr(0, key.size()) != key ||
        word[key.size()] != '=') {
      Fail("expected " + std::string(key) + "=<value>, got '" + std::string(word) + "'");
    }
    return word.substr(key.size() + 1);
  }

 private:
  std::string_view origin_;
  size_t line_;
};

Instruction ParseInstruction(const LineParser& p, const std::vector<std::string_view>& w,
                             size_t pc) {
  std::string_view mnemonic = w[0];
  auto need = [&](size_t n) {
    if (w.size() != n) p.Fail("wrong operand count for " + std::string(mnemonic));
  };
  if (mnemonic == "CONST") {
    need(3);
    return Instruction::LoadConst(p.Register(w[1]), p.Int(w[2]));
  }
  if (mnemonic == "MOV") {
    need(3);
    return Instruction::Move(p.Register(w[1]), p.Register(w[2]));
  }
  static const std::pair<std::string_view, Opcode> kBinary[] = {
      {"ADD", Opcode::kAdd}, {"SUB", Opcode::kSub}, {"MUL", Opcode::kMul}, {"LT", Opcode::kCmpLt}};
  for (const auto& [name, op] : kBinary) {
    if (mnemonic == name) {
      need(4);
      return Instruction::Binary(op, p.Register(w[1]), p.Register(w[2]), p.Register(w[3]));
    }
  }
  if (mnemonic == "JMP") {
    need(2);
    return Instruction::Jump(p.JumpTarget(w[1], pc));
  }
  if (mnemonic == "JMPZ") {
    need(3);
    return Instruction::JumpIfZero(p.Register(w[1]), p.JumpTarget(w[2], pc));
  }
  if (mnemonic == "RET") {
    need(2);
    return Instruction::Return(p.Register(w[1]));
  }
  if (mnemonic == "INVOKE") {
    // INVOKE <sym> r.. -> r<d>
    if (w.size() < 4 || w[w.size() - 2] != "->") p.Fail("INVOKE needs '-> r<dst>'");
    int64_t sym = p.Int(w[1]);
    if (sym < 0 || sym >= (1 << 16)) p.Fail("symbolic index must fit in 16 bits");
    size_t argc = w.size() - 4;
    if (argc > kMaxInvokeArgs) p.Fail("too many INVOKE arguments");
    Instruction insn;
    insn.op = Opcode::kInvokeSym;
    insn.symbol = static_cast<uint16_t>(sym);
    insn.argc = static_cast<uint8_t>(argc);
    for (size_t k = 0; k < argc; ++k) insn.args[k] = p.Register(w[2 + k]);
    insn.dst = p.Register(w.back());
    return insn;
  }
  p.Fail("unknown instruction '" + std::string(mnemonic) + "'");
}

}  // namespace

ProgramDesc ParseProgram(std::string_view text, std::string_view origin) {
  ProgramDesc desc;
  std::vector<SymbolEntry>* section = nullptr;
  bool section_is_framework = false;
  std::shared_ptr<MethodDef> current;
  size_t current_line = 0;
  // Pending `.repeat` block: raw instruction lines and their line numbers.
  int64_t repeat_count = -1;
  std::vector<std::pair<std::string, size_t>> repeat_lines;

  auto finish_method = [&]() {
    if (repeat_count >= 0) LineParser(origin, current_line).Fail("unterminated .repeat block");
    if (!current) return;
    if (current->code.empty()) {
      LineParser(origin, current_line).Fail(current->signature + ": method has no instructions");
    }
    SymbolEntry e;
    e.kind = SymbolEntry::Kind::kMethod;
    e.name = current->signature;
    e.arity = current->arity;
    e.in_framework = section_is_framework;
    e.method = std::move(current);
    section->push_back(std::move(e));
    current.reset();
  };

  size_t line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto words = SplitWords(line);
    if (words.empty()) {
      if (eol == text.size()) break;
      continue;
    }
    LineParser p(origin, line_no);
    std::string_view head = words[0];
    if (head == "framework" || head == "app") {
      if (words.size() != 1) p.Fail("section header takes no arguments");
      finish_method();
      section_is_framework = head == "framework";
      section = section_is_framework ? &desc.framework : &desc.app;
    } else if (head == "method") {
      if (section == nullptr) p.Fail("method outside of a section");
      finish_method();
      if (words.size() != 4) p.Fail("expected: method <name>/<arity> regs=<n> builtin=<0|1>");
      auto def = std::make_shared<MethodDef>();
      def->signature = std::string(words[1]);
      auto arity = ArityFromSignature(def->signature);
      if (!arity) p.Fail("bad signature '" + def->signature + "' (want name/arity, arity <= 4)");
      def->arity = *arity;
      int64_t regs = p.Int(p.KeyValue(words[2], "regs"));
      if (regs <= 0 || regs > 0xffff) p.Fail("regs out of range");
      def->num_registers = static_cast<uint16_t>(regs);
      int64_t builtin = p.Int(p.KeyValue(words[3], "builtin"));
      if (builtin != 0 && builtin != 1) p.Fail("builtin must be 0 or 1");
      def->is_builtin = builtin == 1;
      current = std::move(def);
      current_line = line_no;
    } else if (head == "virtual") {
      if (section == nullptr) p.Fail("virtual outside of a section");
      finish_method();
      if (words.size() != 3) p.Fail("expected: virtual <name>/<arity> targets=<sym>,...");
      SymbolEntry e;
      e.kind = SymbolEntry::Kind::kVirtual;
      e.name = std::string(words[1]);
      auto arity = ArityFromSignature(e.name);
      if (!arity || *arity == 0) p.Fail("virtual slots need arity >= 1 (receiver)");
      e.arity = *arity;
      e.in_framework = section_is_framework;
      std::string_view list = p.KeyValue(words[2], "targets");
      size_t start = 0;
      while (start <= list.size()) {
        size_t comma = list.find(',', start);
        if (comma == std::string_view::npos) comma = list.size();
        int64_t sym = p.Int(list.substr(start, comma - start));
        if (sym < 0 || sym >= (1 << 16)) p.Fail("symbolic index must fit in 16 bits");
        e.targets.push_back(static_cast<uint16_t>(sym));
        start = comma + 1;
      }
      if (e.targets.empty() || e.targets.size() > kMaxVirtualTargets) {
        p.Fail("virtual slots take 1..8 targets");
      }
      section->push_back(std::move(e));
    } else if (head == ".repeat") {
      if (!current) p.Fail(".repeat outside of a method");
      if (repeat_count >= 0) p.Fail("nested .repeat");
      if (words.size() != 2) p.Fail("expected: .repeat <count>");
      repeat_count = p.Int(words[1]);
      if (repeat_count < 0 || repeat_count > static_cast<int64_t>(kMaxCodeLength)) {
        p.Fail(".repeat count out of range");
      }
      repeat_lines.clear();
    } else if (head == ".end") {
      if (repeat_count < 0) p.Fail(".end without .repeat");
      if (words.size() != 1) p.Fail(".end takes no arguments");
      for (int64_t k = 0; k < repeat_count; ++k) {
        for (const auto& [body, body_line] : repeat_lines) {
          if (current->code.size() >= kMaxCodeLength) p.Fail("method too long");
          current->code.push_back(
              ParseInstruction(LineParser(origin, body_line), SplitWords(body), current->code.size()));
        }
      }
      repeat_count = -1;
    } else if (repeat_count >= 0) {
      repeat_lines.emplace_back(std::string(line), line_no);
    } else {
      if (!current) p.Fail("instruction outside of a method");
      current->code.push_back(ParseInstruction(p, words, current->code.size()));
    }
    if (eol == text.size()) break;
  }
  finish_method();
  return desc;
}

std::string FormatProgram(const ProgramDesc& desc) {
  std::ostringstream os;
  auto emit = [&](const char* header, const std::vector<SymbolEntry>& entries) {
    if (entries.empty()) return;
    os << header << '\n';
    for (const SymbolEntry& e : entries) {
      if (e.IsMethod()) {
        const MethodDef& m = *e.method;
        os << "method " << m.signature << " regs=" << m.num_registers
           << " builtin=" << (m.is_builtin ? 1 : 0) << '\n';
        for (size_t pc = 0; pc < m.code.size(); ++pc) {
          os << "  " << FormatInstruction(m.code[pc], pc) << '\n';
        }
      } else {
        os << "virtual " << e.name << " targets=";
        for (size_t k = 0; k < e.targets.size(); ++k) os << (k ? "," : "") << e.targets[k];
        os << '\n';
      }
    }
  };
  emit("framework", desc.framework);
  emit("app", desc.app);
  return os.str();
}

std::optional<uint16_t> SymbolTable::Find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

SymbolTable LoadProgram(const ProgramDesc& framework, const ProgramDesc& app) {
  if (!framework.app.empty()) throw ProgramError("framework description has an app section");
  if (!app.framework.empty()) throw ProgramError("app description has a framework section");
  SymbolTable table;
  table.entries_.reserve(framework.framework.size() + app.app.size());
  for (const SymbolEntry& e : framework.framework) table.entries_.push_back(e);
  table.framework_size_ = table.entries_.size();
  for (const SymbolEntry& e : app.app) table.entries_.push_back(e);
  if (table.entries_.size() > (1u << 16)) throw ProgramError("more than 2^16 symbols");

  const auto& entries = table.entries_;
  for (size_t i = 0; i < entries.size(); ++i) {
    const SymbolEntry& e = entries[i];
    if (!table.by_name_.emplace(e.name, static_cast<uint16_t>(i)).second) {
      throw ProgramError("duplicate symbol " + e.name);
    }
    if (!e.IsMethod()) {
      for (uint16_t t : e.targets) {
        if (t >= entries.size()) {
          throw ProgramError(e.name + ": dangling symbolic index " + std::to_string(t));
        }
        if (!entries[t].IsMethod() || entries[t].arity != e.arity) {
          throw ProgramError(e.name + ": target " + std::to_string(t) +
                             " is not a method of the same arity");
        }
      }
      continue;
    }
    const MethodDef& m = *e.method;
    if (auto problem = CheckMethodShape(m)) throw ProgramError(*problem);
    if (m.is_builtin && !e.in_framework) {
      throw ProgramError(m.signature + ": builtin methods must live in the framework section");
    }
    for (size_t pc = 0; pc < m.code.size(); ++pc) {
      const Instruction& insn = m.code[pc];
      if (insn.op != Opcode::kInvokeSym) continue;
      if (insn.symbol >= entries.size()) {
        throw ProgramError(m.signature + ": dangling symbolic index " +
                           std::to_string(insn.symbol) + " at pc " + std::to_string(pc));
      }
      if (entries[insn.symbol].arity != insn.argc) {
        throw ProgramError(m.signature + ": arity mismatch calling " +
                           entries[insn.symbol].name + " at pc " + std::to_string(pc));
      }
      if (e.in_framework && insn.symbol >= table.framework_size_) {
        throw ProgramError(m.signature + ": framework code may not reference app symbols");
      }
    }
  }
  return table;
}

SymbolTable LoadProgram(const ProgramDesc& whole) {
  ProgramDesc fw;
  fw.framework = whole.framework;
  ProgramDesc app;
  app.app = whole.app;
  return LoadProgram(fw, app);
}

}  // namespace codeshare
