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

#include <doctest.h>

#include "codeshare/vm/interpreter.h"
#include "codeshare/vm/program.h"
#include "helpers.h"
#include "support/oracles.h"
#include "support/sinks.h"

namespace codeshare {
namespace {

using testing::InterpSink;
using testing::RefEval;

ProgramDesc One(const std::string& body) { return ParseProgram("framework\n" + body, "t"); }

TEST_CASE("framework corpus parses with stable indices") {
  ProgramDesc d = ParseProgram(testing::ReadCorpus("programs/framework.prog"), "fw");
  REQUIRE(d.framework.size() == 14);
  CHECK(d.framework[0].name == "fw.add/2");
  CHECK(d.framework[0].method->is_builtin);
  CHECK(d.framework[6].kind == SymbolEntry::Kind::kVirtual);
  CHECK(d.framework[6].targets == std::vector<uint16_t>{3, 4, 5});
  CHECK(d.app.empty());
}

TEST_CASE("format then parse reproduces every program in the corpus") {
  for (const char* name : {"programs/framework.prog", "programs/app_gallery.prog",
                           "programs/app_notes.prog", "programs/loop_heavy.prog"}) {
    ProgramDesc d = ParseProgram(testing::ReadCorpus(name), name);
    std::string text = FormatProgram(d);
    ProgramDesc again = ParseProgram(text, "again");
    REQUIRE(again.framework.size() == d.framework.size());
    REQUIRE(again.app.size() == d.app.size());
    for (size_t i = 0; i < d.framework.size(); ++i) {
      if (d.framework[i].IsMethod()) CHECK(*again.framework[i].method == *d.framework[i].method);
    }
    for (size_t i = 0; i < d.app.size(); ++i) CHECK(*again.app[i].method == *d.app[i].method);
    CHECK(FormatProgram(again) == text);
  }
}

TEST_CASE(".repeat expands its body") {
  ProgramDesc d = One(
      "method r/1 regs=2 builtin=0\n"
      ".repeat 5\n  ADD r0 r0 r0\n.end\n  RET r0\n");
  CHECK(d.framework[0].method->code.size() == 6);
}

TEST_CASE("relative jumps become absolute targets") {
  ProgramDesc d = One(
      "method j/1 regs=2 builtin=0\n"
      "  JMPZ r0 +2\n  RET r1\n  RET r0\n");
  CHECK(d.framework[0].method->code[0].target == 2);
}

TEST_CASE("malformed programs are rejected with the line") {
  CHECK_THROWS_AS(One("method x/1 regs=2 builtin=0\n  FOO r0\n  RET r0\n"), ProgramError);
  CHECK_THROWS_AS(One("method x/1 regs=2 builtin=0\n  INVOKE 0 r0 r1\n  RET r0\n"),
                  ProgramError);
  CHECK_THROWS_AS(One("  RET r0\n"), ProgramError);
  try {
    One("method x/1 regs=2 builtin=0\n  ADD r0 r0\n  RET r0\n");
    FAIL("expected a parse error");
  } catch (const ProgramError& e) {
    CHECK(std::string(e.what()).find("t:3") != std::string::npos);
  }
}

TEST_CASE("shape checks") {
  MethodDef m;
  m.signature = "s/1";
  m.arity = 1;
  m.num_registers = 2;
  CHECK(CheckMethodShape(m).has_value());  // empty
  m.code = {Instruction::Return(0)};
  CHECK_FALSE(CheckMethodShape(m).has_value());
  m.code = {Instruction::Return(5)};
  CHECK(CheckMethodShape(m).has_value());  // register
  m.code = {Instruction::Jump(7), Instruction::Return(0)};
  CHECK(CheckMethodShape(m).has_value());  // target
  m.code = {Instruction::LoadConst(0, 1)};
  CHECK(CheckMethodShape(m).has_value());  // falls off the end
  m.code = {Instruction::Return(0)};
  m.arity = 2;
  CHECK(CheckMethodShape(m).has_value());  // arity vs signature
  CHECK(ArityFromSignature("a.b/3") == std::optional<uint16_t>(3));
  CHECK_FALSE(ArityFromSignature("nope").has_value());
}

TEST_CASE("loading resolves and validates symbolic indices") {
  CHECK_THROWS_AS(LoadProgram(One("method a/1 regs=2 builtin=0\n  INVOKE 9 r0 -> r0\n  RET r0\n")),
                  ProgramError);
  CHECK_THROWS_AS(
      LoadProgram(One("method a/1 regs=2 builtin=0\n  RET r0\n"
                      "method b/1 regs=2 builtin=0\n  INVOKE 0 r0 r1 -> r0\n  RET r0\n")),
      ProgramError);
  CHECK_THROWS_AS(LoadProgram(One("method a/1 regs=2 builtin=0\n  RET r0\n"
                                  "virtual v/1 targets=0\nvirtual w/1 targets=1\n")),
                  ProgramError);
  CHECK_THROWS_AS(LoadProgram(One("method a/1 regs=2 builtin=0\n  RET r0\n"
                                  "method a/1 regs=2 builtin=0\n  RET r0\n")),
                  ProgramError);
  ProgramDesc fw = One("method a/1 regs=2 builtin=0\n  RET r0\n");
  ProgramDesc app = ParseProgram("app\nmethod b/1 regs=2 builtin=1\n  RET r0\n", "app");
  CHECK_THROWS_AS(LoadProgram(fw, app), ProgramError);

  ProgramDesc ok = ParseProgram("app\nmethod b/1 regs=2 builtin=0\n  INVOKE 0 r0 -> r1\n  RET r1\n",
                                "app");
  SymbolTable t = LoadProgram(fw, ok);
  CHECK(t.size() == 2);
  CHECK(t.framework_size() == 1);
  CHECK(t.Find("b/1") == std::optional<uint16_t>(1));
  CHECK_FALSE(t.at(1).in_framework);
}

TEST_CASE("virtual dispatch uses the non-negative residue of the receiver") {
  SymbolTable t = testing::FrameworkSymbols();
  CHECK(t.ResolveTarget(6, 0) == 3);
  CHECK(t.ResolveTarget(6, 4) == 4);
  CHECK(t.ResolveTarget(6, -1) == 5);
  CHECK(t.ResolveTarget(6, -3) == 3);
  CHECK(t.ResolveTarget(6, INT64_MIN) == t.at(6).targets[static_cast<size_t>(
                                               ((INT64_MIN % 3) + 3) % 3)]);
  CHECK(t.ResolveTarget(3, 99) == 3);
}

TEST_CASE("interpreter agrees with the reference evaluator on the framework") {
  SymbolTable t = testing::FrameworkSymbols();
  InterpSink sink(t);
  for (uint16_t s = 0; s < t.size(); ++s) {
    const SymbolEntry& e = t.at(s);
    if (!e.IsMethod()) continue;
    for (Value a : {-7, -1, 0, 1, 2, 5, 13}) {
      std::vector<Value> args(e.arity, a);
      if (e.arity > 1) args[1] = a * 3 + 1;
      CAPTURE(e.name);
      CAPTURE(a);
      CHECK(Interpret(*e.method, args, t, sink, nullptr).value == RefEval(t, s, args).value);
    }
  }
}

TEST_CASE("interpreter counts back edges and steps") {
  SymbolTable t = testing::FrameworkSymbols();
  InterpSink sink(t);
  uint16_t sum_to = *t.Find("util.sum_to/1");
  std::vector<Value> five{5};
  InterpResult r = Interpret(*t.at(sum_to).method, five, t, sink, nullptr);
  CHECK(r.value == 10);
  CHECK(r.back_edges == 5);
  CHECK(r.steps > 5 * 4);
}

TEST_CASE("arithmetic wraps") {
  ProgramDesc d = One(
      "method w/1 regs=3 builtin=0\n  CONST r1 9223372036854775807\n  ADD r2 r1 r0\n  RET r2\n");
  SymbolTable t = LoadProgram(d);
  InterpSink sink(t);
  std::vector<Value> one{1};
  CHECK(Interpret(*t.at(0).method, one, t, sink, nullptr).value == INT64_MIN);
}

TEST_CASE("profiles record the concrete callee of virtual call sites") {
  SymbolTable t = testing::FrameworkSymbols();
  InterpSink sink(t);
  uint16_t dispatch = *t.Find("util.dispatch/1");
  Profile p;
  for (Value r : {0, 3, 6}) {
    std::vector<Value> a{r};
    Interpret(*t.at(dispatch).method, a, t, sink, &p);
  }
  REQUIRE(p.sites().size() == 1);
  uint32_t pc = p.sites().begin()->first;
  CHECK(p.MonomorphicTarget(pc) == std::optional<uint16_t>(3));
  std::vector<Value> a{1};
  Interpret(*t.at(dispatch).method, a, t, sink, &p);
  CHECK_FALSE(p.MonomorphicTarget(pc).has_value());
  CHECK(p.observations() == 4);
  CHECK(Profile::DataBytes(*t.at(dispatch).method) > Profile::DataBytes(*t.at(0).method));
}

TEST_CASE("runtime faults on unchecked code") {
  MethodDef m;
  m.signature = "bad/0";
  m.num_registers = 1;
  m.code = {Instruction::Return(4)};
  SymbolTable t;
  InterpSink sink(t);
  CHECK_THROWS_AS(Interpret(m, {}, t, sink, nullptr), RuntimeFault);
}

}  // namespace
}  // namespace codeshare
