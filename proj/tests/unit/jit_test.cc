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

#include <cstring>
#include <random>

#include "codeshare/jit/compiled_code.h"
#include "codeshare/jit/compiler.h"
#include "codeshare/jit/executor.h"
#include "helpers.h"
#include "support/oracles.h"
#include "support/sinks.h"

namespace codeshare {
namespace {

using testing::CompiledSink;
using testing::InterpSink;

TEST_CASE("compiled blocks carry a validated header") {
  SymbolTable t = testing::FrameworkSymbols();
  const MethodDef& m = *t.at(8).method;
  HashId h = HashIdentify(m);
  CompileOutput out = Compile(m, h, nullptr, t);
  std::string err;
  auto view = CompiledView::Open(out.bytes.data(), out.bytes.size(), &h, &err);
  REQUIRE(view);
  CHECK(view->header().magic == kCompiledMagic);
  CHECK(view->header().total_length == out.bytes.size());
  CHECK(view->source_hash() == h);
  CHECK(view->ops().size() == out.op_count);
  CHECK_FALSE(Disassemble(*view).empty());

  HashId other = h;
  other.digest[0] ^= 1;
  CHECK_FALSE(CompiledView::Open(out.bytes.data(), out.bytes.size(), &other, &err));
  CHECK_FALSE(err.empty());
  CHECK_FALSE(CompiledView::Open(out.bytes.data(), out.bytes.size() - 1, &h, &err));
  std::vector<std::byte> poisoned(out.bytes.size(), std::byte{kFreedCodeByte});
  CHECK_FALSE(CompiledView::Open(poisoned.data(), poisoned.size(), nullptr, &err));
}

TEST_CASE("builtins are inlined; other calls stay symbolic") {
  SymbolTable t = testing::FrameworkSymbols();
  uint16_t poly = *t.Find("util.poly/1");
  CompileOutput out = Compile(*t.at(poly).method, HashIdentify(*t.at(poly).method), nullptr, t);
  CHECK(out.inlined == std::vector<uint16_t>{1, 0});
  auto view = CompiledView::Open(out.bytes.data(), out.bytes.size(), nullptr, nullptr);
  for (const FastOp& op : view->ops()) CHECK(op.kind != FastKind::kInvoke);
  CHECK((view->header().flags & kHasInlining) != 0);

  CompileOptions no_inline;
  no_inline.inline_builtins = false;
  CompileOutput plain = Compile(*t.at(poly).method, HashIdentify(*t.at(poly).method), nullptr, t,
                                no_inline);
  CHECK(plain.inlined.empty());
}

TEST_CASE("monomorphic profiles produce guards; polymorphic ones do not") {
  SymbolTable t = testing::FrameworkSymbols();
  uint16_t d = *t.Find("util.dispatch/1");
  const MethodDef& m = *t.at(d).method;
  InterpSink sink(t);
  Profile mono, poly;
  for (Value r : {0, 3}) {
    std::vector<Value> a{r};
    Interpret(m, a, t, sink, &mono);
  }
  for (Value r : {0, 1, 2}) {
    std::vector<Value> a{r};
    Interpret(m, a, t, sink, &poly);
  }
  CHECK(Compile(m, HashIdentify(m), &mono, t).guard_count == 1);
  CHECK(Compile(m, HashIdentify(m), &poly, t).guard_count == 0);
  CompileOptions off;
  off.emit_guards = false;
  CHECK(Compile(m, HashIdentify(m), &mono, t, off).guard_count == 0);
}

TEST_CASE("a failing guard takes the slow path and reports it") {
  SymbolTable t = testing::FrameworkSymbols();
  uint16_t d = *t.Find("util.dispatch/1");
  std::map<uint16_t, Profile> profiles;
  InterpSink trainer(t, &profiles);
  std::vector<Value> zero{0};
  trainer.Call(d, zero);
  CompiledSink fast(t, profiles);
  InterpSink slow(t);
  for (Value r = -6; r <= 6; ++r) {
    std::vector<Value> a{r};
    ExecResult e = fast.Run(d, a);
    CHECK(e.value == Interpret(*t.at(d).method, a, t, slow, nullptr).value);
    CHECK(e.guard_failed == (t.ResolveTarget(6, r) != 3));
  }
}

TEST_CASE("fast form matches the interpreter on random programs") {
  std::mt19937_64 rng(1234);
  int guarded = 0;
  for (uint64_t seed = 100; seed < 140; ++seed) {
    SymbolTable t = LoadProgram(testing::RandomProgram(seed));
    std::map<uint16_t, Profile> profiles;
    InterpSink trainer(t, &profiles);
    for (uint16_t s = 0; s < t.size(); ++s) {
      if (!t.at(s).IsMethod()) continue;
      std::vector<Value> z(t.at(s).arity, 0);
      trainer.Call(s, z);
    }
    CompiledSink fast(t, profiles);
    InterpSink slow(t);
    for (uint16_t s = 0; s < t.size(); ++s) {
      if (!t.at(s).IsMethod()) continue;
      for (int k = 0; k < 10; ++k) {
        std::vector<Value> a(t.at(s).arity);
        for (Value& v : a) v = static_cast<Value>(rng() % 31) - 15;
        ExecResult e = fast.Run(s, a);
        guarded += e.guard_failed;
        CAPTURE(seed);
        CAPTURE(t.at(s).name);
        CHECK(e.value == Interpret(*t.at(s).method, a, t, slow, nullptr).value);
        CHECK(e.value == testing::RefEval(t, s, a).value);
      }
    }
  }
  CHECK(guarded > 0);
}

TEST_CASE("compiled code is position independent") {
  SymbolTable t = testing::FrameworkSymbols();
  uint16_t fib = *t.Find("util.fib/1");
  std::map<uint16_t, Profile> none;
  CompiledSink fast(t, none);
  CompiledView v = fast.View(fib);
  std::vector<std::byte> moved(v.header().total_length + 48);
  std::memcpy(moved.data() + 48, &v.header(), v.header().total_length);
  auto w = CompiledView::Open(moved.data() + 48, v.header().total_length, nullptr, nullptr);
  REQUIRE(w);
  std::vector<Value> a{10};
  CHECK(ExecuteCompiled(*w, a, t, fast).value == ExecuteCompiled(v, a, t, fast).value);
  CHECK(ExecuteCompiled(*w, a, t, fast).value == 55);
}

}  // namespace
}  // namespace codeshare
