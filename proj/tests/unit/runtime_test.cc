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

#include "codeshare/common/check.h"
#include "codeshare/runtime/process.h"
#include "helpers.h"

namespace codeshare {
namespace {

using testing::SmallThresholds;
using testing::World;

void Drive(Process& p, std::string_view sig, uint64_t n, std::vector<Value> args) {
  for (uint64_t k = 0; k < n; ++k) p.Invoke(sig, args);
}

TEST_CASE("controller: profile at warm, lookup at ST, compile at HT") {
  World w;
  SymbolTable t = testing::FrameworkSymbols();
  auto p = w.Spawn(1, t, SmallThresholds(2, 4, 8));
  const std::string sig = "util.fib/1";
  // fib(0) takes no back edges: one hotness step per call.
  Drive(*p, sig, 1, {0});
  CHECK(p->method(sig).profile == nullptr);
  Drive(*p, sig, 1, {0});
  CHECK(p->method(sig).profile != nullptr);
  CHECK(p->method(sig).profile_block.has_value());
  Drive(*p, sig, 2, {0});
  CHECK(p->stats().sharing_tasks == 1);
  CHECK(p->stats().sharing_hits == 0);
  CHECK_FALSE(p->method(sig).entry.compiled);
  Drive(*p, sig, 4, {0});
  CHECK(p->method(sig).entry.compiled);
  CHECK(p->stats().compiles == 1);
  CHECK(p->stats().publishes == 1);
  CHECK(p->pending_tasks() == 0);
  Value fast = p->Invoke(sig, std::vector<Value>{12});
  CHECK(p->stats().compiled_invocations == 1);
  CHECK(fast == 144);
}

TEST_CASE("controller: loop back edges count toward hotness") {
  World w;
  SymbolTable t = testing::FrameworkSymbols();
  auto p = w.Spawn(1, t, SmallThresholds(10, 20, 40));
  p->Invoke("util.sum_to/1", std::vector<Value>{30});
  CHECK(p->method("util.sum_to/1").hotness == 31);
  CHECK(p->method("util.sum_to/1").profile != nullptr);
  CHECK(p->stats().sharing_tasks == 2);  // sum_to and the fw.add it calls
  p->Invoke("util.sum_to/1", std::vector<Value>{30});
  CHECK(p->method("util.sum_to/1").entry.compiled);
}

TEST_CASE("controller: a second process adopts instead of compiling") {
  World w;
  SymbolTable t = testing::FrameworkSymbols();
  EventLog log;
  auto a = w.Spawn(1, t, SmallThresholds(2, 4, 8), &log);
  auto b = w.Spawn(2, t, SmallThresholds(2, 4, 8), &log);
  Drive(*a, "util.fib/1", 10, {7});
  Drive(*b, "util.fib/1", 4, {7});
  const RuntimeMethod& m = b->method("util.fib/1");
  CHECK(m.entry.adopted);
  CHECK(m.lookup_hit);
  CHECK(m.compile_ns == a->method("util.fib/1").compile_ns);
  CHECK(b->stats().compiles == 0);
  CHECK(b->stats().adoptions == 1);
  CHECK(b->Invoke("util.fib/1", std::vector<Value>{10}) == 55);
  CHECK(b->sharee_code().size() == 1);
  CHECK(b->sharing_map()->RefCount(m.entry.handle) == 1);
  b->Exit();
  CHECK(a->sharing_map()->RefCount(m.entry.handle) == 0);
  bool saw_share_hit = false;
  for (const std::string& line : log.lines()) {
    saw_share_hit |= line.find("\"ev\":\"share\"") != std::string::npos &&
                     line.find("\"hit\":true") != std::string::npos;
  }
  CHECK(saw_share_hit);
}

TEST_CASE("baseline processes never touch the region") {
  World w;
  SymbolTable t = testing::FrameworkSymbols();
  ProcessOptions o = SmallThresholds(2, 4, 8);
  o.mode = RunMode::kBaseline;
  uint64_t before = w.region->ContentDigest();
  auto p = w.Spawn(1, t, o);
  Drive(*p, "util.fib/1", 20, {1});
  CHECK_FALSE(p->sharing());
  CHECK(p->cache().is_private());
  CHECK(p->stats().compiles == 1);
  CHECK(p->stats().sharing_tasks == 0);
  CHECK(w.region->ContentDigest() == before);
}

TEST_CASE("deoptimization resets hotness and invalidates the published node") {
  World w;
  SymbolTable t = testing::FrameworkSymbols();
  auto p = w.Spawn(1, t, SmallThresholds(1, 2, 4));
  const std::string sig = "util.dispatch/1";
  Drive(*p, sig, 6, {0});
  REQUIRE(p->method(sig).entry.compiled);
  HashId key = *p->method(sig).hash;
  CHECK(p->sharing_map()->Lookup(key).has_value());
  Value v = p->Invoke(sig, std::vector<Value>{1});
  CHECK(v == 3);
  CHECK(p->stats().deopts == 1);
  CHECK(p->method(sig).hotness == 0);
  CHECK_FALSE(p->method(sig).entry.compiled);
  CHECK_FALSE(p->sharing_map()->Lookup(key).has_value());
}

TEST_CASE("osr threshold is counted only") {
  World w;
  SymbolTable t = testing::FrameworkSymbols();
  ProcessOptions o;
  o.thresholds = {5, 10, 20, 50};
  auto p = w.Spawn(1, t, o);
  p->Invoke("util.sum_to/1", std::vector<Value>{100});
  // sum_to's back edges and the fw.add calls inside the loop.
  CHECK(p->stats().osr_events == 2);
  CHECK_FALSE(p->method("text.hash/2").entry.compiled);
}

TEST_CASE("collector: modes alternate, starting with partial") {
  World w;
  SymbolTable t = testing::FrameworkSymbols();
  auto p = w.Spawn(1, t, SmallThresholds(2, 4, 8));
  for (int k = 0; k < 5; ++k) p->Collect();
  std::vector<GcMode> want{GcMode::kPartial, GcMode::kFull, GcMode::kPartial, GcMode::kFull,
                           GcMode::kPartial};
  CHECK(p->stats().gc_modes == want);
}

TEST_CASE("collector: full collection retires unexecuted code and cold profiles") {
  World w;
  SymbolTable t = testing::FrameworkSymbols();
  auto p = w.Spawn(1, t, SmallThresholds(2, 4, 8));
  Drive(*p, "util.poly/1", 10, {2});
  Drive(*p, "util.fib/1", 3, {0});  // warm, not hot
  REQUIRE(p->method("util.poly/1").entry.compiled);
  REQUIRE(p->method("util.fib/1").profile_block.has_value());
  uint64_t code = p->cache().code_bytes();
  CHECK(code > 0);

  GcResult g1 = p->Collect();  // partial: clears the executed flags
  CHECK(g1.mode == GcMode::kPartial);
  CHECK(p->method("util.poly/1").entry.compiled);
  GcResult g2 = p->Collect();  // full: poly did not run since the partial
  CHECK(g2.mode == GcMode::kFull);
  CHECK(g2.made_non_entrant >= 1);
  CHECK(g2.profiles_deleted >= 1);
  CHECK_FALSE(p->method("util.fib/1").profile_block.has_value());
  CHECK_FALSE(p->method("util.poly/1").entry.compiled);
  // Published, nobody adopted it: freed in the same pass.
  CHECK(g2.code_freed == g2.made_non_entrant);
  CHECK(p->cache().code_bytes() == 0);
  CHECK(p->own_code().empty());
}

TEST_CASE("collector: executed code survives a full collection") {
  World w;
  SymbolTable t = testing::FrameworkSymbols();
  auto p = w.Spawn(1, t, SmallThresholds(2, 4, 8));
  Drive(*p, "util.poly/1", 10, {2});
  p->Collect();
  Drive(*p, "util.poly/1", 1, {2});
  GcResult g = p->Collect();
  CHECK(g.mode == GcMode::kFull);
  CHECK(p->method("util.poly/1").entry.compiled);
  // The builtins were inlined into poly, so their own copies sat idle.
  CHECK(g.made_non_entrant == 2);
  CHECK_FALSE(p->method("fw.add/2").entry.compiled);
}

TEST_CASE("collector: adopted code pins the owner's copy") {
  World w;
  SymbolTable t = testing::FrameworkSymbols();
  auto a = w.Spawn(1, t, SmallThresholds(2, 4, 8));
  auto b = w.Spawn(2, t, SmallThresholds(2, 4, 8));
  Drive(*a, "util.poly/1", 10, {2});
  Drive(*b, "util.poly/1", 5, {2});
  CodeHandle h = a->method("util.poly/1").entry.handle;
  REQUIRE(b->method("util.poly/1").entry.handle == h);
  a->Collect();
  GcResult full = a->Collect();
  CHECK(full.made_non_entrant >= 1);
  CHECK(full.kept_refcount >= 1);
  CHECK(a->cache().IsLive(h));
  CHECK(b->Invoke("util.poly/1", std::vector<Value>{2}) == 17);

  // Full collection in the sharee drops its profile of the adopted method.
  b->Collect();
  b->Collect();
  CHECK_FALSE(b->method("util.poly/1").profile_block.has_value());
  CHECK(b->method("util.poly/1").entry.adopted);

  b->Exit();
  GcResult again = a->Collect();
  CHECK(again.code_freed >= 1);
  CHECK_FALSE(a->cache().IsLive(h));
}

TEST_CASE("collector: a dead sharee's adoptions are swept") {
  World w;
  SymbolTable t = testing::FrameworkSymbols();
  auto a = w.Spawn(1, t, SmallThresholds(2, 4, 8));
  auto b = w.Spawn(2, t, SmallThresholds(2, 4, 8));
  Drive(*a, "util.poly/1", 10, {2});
  Drive(*b, "util.poly/1", 5, {2});
  CodeHandle h = a->method("util.poly/1").entry.handle;
  w.alive.erase(2);
  b.reset();  // killed, never released
  CHECK(a->sharing_map()->RefCount(h) == 1);
  GcResult g = a->Collect();
  CHECK(g.dead_adoptions_released >= 1);
  CHECK(a->sharing_map()->RefCount(h) == 0);
}

TEST_CASE("allocation pressure: collect, grow, then discard at the cap") {
  World w;
  SymbolTable t = testing::FrameworkSymbols();
  ProcessOptions o = SmallThresholds(1, 2, 3);
  o.sizing = {64, 512};
  auto p = w.Spawn(1, t, o);
  for (const char* sig : {"util.poly/1", "util.fib/1", "util.mix3/3", "text.hash/2",
                          "util.sum_to/1", "util.dispatch/1", "text.count_down/1"}) {
    const SymbolEntry& e = t.at(*t.Find(sig));
    Drive(*p, sig, 4, std::vector<Value>(e.arity, 1));
  }
  CHECK(p->stats().compile_discards + p->stats().compiles >= 7);
  CHECK(p->cache().code_bytes() <= 256);
  CHECK(p->stats().arena_grows > 0);
  CHECK(p->stats().gc_modes.size() > 0);
  CHECK(p->stats().freed_code_derefs == 0);
}

TEST_CASE("gc off: arenas only grow") {
  World w;
  SymbolTable t = testing::FrameworkSymbols();
  ProcessOptions o = SmallThresholds(1, 2, 3);
  o.sizing = {64, 8192};
  o.gc_enabled = false;
  auto p = w.Spawn(1, t, o);
  for (const char* sig : {"util.poly/1", "util.fib/1", "text.count_down/1"}) {
    Drive(*p, sig, 4, {1});
  }
  CHECK(p->stats().gc_modes.empty());
  CHECK(p->stats().arena_grows > 0);
  CHECK(p->stats().compiles >= 3);
}

TEST_CASE("exit marks the segment reclaimable and forbids further calls") {
  World w(testing::SmallRegion(1));
  SymbolTable t = testing::FrameworkSymbols();
  auto p = w.Spawn(1, t, SmallThresholds(2, 4, 8));
  uint32_t seg = p->attachment().segment;
  p->Heartbeat();
  CHECK(w.region->LoadBeacon(seg) != 0);
  p->Exit();
  CHECK(w.region->LoadBeacon(seg) == 0);
  CHECK(p->exited());
  CHECK_THROWS_AS(p->Invoke("util.poly/1", std::vector<Value>{1}), InvariantViolation);
  auto q = w.Spawn(2, t, SmallThresholds(2, 4, 8));
  CHECK(q->attachment().segment == seg);
  CHECK(q->attachment().kind == AttachKind::kReclaimed);
}

TEST_CASE("cost records and exec events cover every invoked method") {
  World w;
  SymbolTable t = testing::FrameworkSymbols();
  EventLog log;
  auto p = w.Spawn(1, t, SmallThresholds(2, 4, 8), &log);
  Drive(*p, "util.poly/1", 12, {2});
  Drive(*p, "util.fib/1", 3, {2});
  // poly, fib and the two builtins poly calls.
  std::vector<CostRecord> recs = p->CostRecords();
  CHECK(recs.size() == 4);
  for (const CostRecord& r : recs) CHECK(r.Ti.has_value());
  const std::string poly = HashIdentify(*t.at(*t.Find("util.poly/1")).method).ToHex();
  for (const CostRecord& r : recs) {
    if (r.method_hash == poly) CHECK(r.Tc.has_value());
  }
  size_t before = log.lines().size();
  p->LogExecTotals();
  CHECK(log.lines().size() == before + 4);
}

}  // namespace
}  // namespace codeshare
