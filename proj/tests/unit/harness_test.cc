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

#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "codeshare/harness/report.h"
#include "codeshare/harness/runner.h"
#include "codeshare/harness/sweep.h"
#include "codeshare/harness/workload.h"
#include "helpers.h"

namespace codeshare {
namespace {

namespace fs = std::filesystem;

const char* kSpec = R"(workload tiny
framework ../programs/framework.prog
app one
app two
schedule interleaved chunk=3
config sharing_threshold=20 hot_threshold=40 warm_threshold=10 segments=2
call one util.poly/1 count=60 args=2
call one util.dispatch/1 count=50 args=0 vary=3
call two util.poly/1 count=60 args=5
call two util.fib/1 count=45 args=6 vary=4 seed=9
)";

WorkloadSpec Tiny() {
  return ParseWorkload(kSpec, "tiny.spec", testing::CorpusPath("specs"));
}

RunConfig SimConfig(const WorkloadSpec& spec, RunMode mode) {
  RunConfig c;
  ApplySpecConfig(spec, &c);
  c.mode = mode;
  c.simulate = true;
  return c;
}

fs::path Scratch(const std::string& tag) {
  fs::path d = fs::temp_directory_path() / ("codeshare_unit_" + std::to_string(::getpid()) + tag);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

TEST_CASE("workload parsing") {
  WorkloadSpec s = Tiny();
  CHECK(s.name == "tiny");
  REQUIRE(s.apps.size() == 2);
  CHECK(s.apps[0].calls.size() == 2);
  CHECK(s.apps[0].TotalCalls() == 110);
  CHECK(s.schedule == ScheduleKind::kInterleaved);
  CHECK(s.chunk == 3);
  CHECK(s.apps[1].calls[1].seed == std::optional<uint64_t>(9));
  CHECK(s.config.at("segments") == "2");
  CHECK_FALSE(s.framework_text.empty());
}

TEST_CASE("workload errors name the line") {
  auto bad = [](const std::string& text) {
    return ParseWorkload(text, "bad.spec", testing::CorpusPath("specs"));
  };
  CHECK_THROWS_AS(bad("workload x\nframework ../programs/framework.prog\ncall ghost a/1 count=1\n"),
                  WorkloadError);
  CHECK_THROWS_AS(bad("workload x\nframework ../programs/nope.prog\n"), WorkloadError);
  CHECK_THROWS_AS(bad("workload x\nframework ../programs/framework.prog\napp a\n"
                      "call a util.fib/1 count=x\n"),
                  WorkloadError);
  CHECK_THROWS_AS(bad("workload x\nbogus line\n"), WorkloadError);
  try {
    bad("workload x\nframework ../programs/framework.prog\napp a\nschedule sideways\n");
    FAIL("expected an error");
  } catch (const WorkloadError& e) {
    CHECK(std::string(e.what()).find("bad.spec:4") != std::string::npos);
  }
  // Unknown methods surface when the app program is loaded.
  WorkloadSpec s = bad("workload x\nframework ../programs/framework.prog\napp a\n"
                       "call a no.such/1 count=2\n");
  CHECK_THROWS_WITH(LoadAppProgram(s, 0), doctest::Contains("no.such/1"));
}

TEST_CASE("config keys map onto the run config") {
  WorkloadSpec s = Tiny();
  RunConfig c;
  ApplySpecConfig(s, &c);
  CHECK(c.thresholds.sharing == 20);
  CHECK(c.thresholds.hot == 40);
  CHECK(c.thresholds.warm == 10);
  CHECK(c.region.segment_count == 2);
  s.config["gc"] = "off";
  s.config["initial_arena"] = "2048";
  ApplySpecConfig(s, &c);
  CHECK_FALSE(c.gc_enabled);
  CHECK(c.sizing.initial_arena_bytes == 2048);
  s.config["segments"] = "-1";
  CHECK_THROWS_AS(ApplySpecConfig(s, &c), ConfigError);
  s.config.erase("segments");
  s.config["colour"] = "blue";
  CHECK_THROWS_AS(ApplySpecConfig(s, &c), ConfigError);
}

TEST_CASE("call streams honour counts, arities and variation") {
  WorkloadSpec s = Tiny();
  SymbolTable t = LoadAppProgram(s, 1);
  CallStream a(s.apps[1], t, 3), b(s.apps[1], t, 3);
  uint64_t n = 0;
  std::set<Value> fib_args;
  while (!a.Done()) {
    Invocation x = a.Next(), y = b.Next();
    CHECK(x.symbol == y.symbol);
    CHECK(x.args == y.args);
    CHECK(x.args.size() == t.at(x.symbol).arity);
    if (t.at(x.symbol).name == "util.fib/1") {
      fib_args.insert(x.args[0]);
      CHECK(x.args[0] >= 6);
      CHECK(x.args[0] < 10);
    }
    ++n;
  }
  CHECK(n == s.apps[1].TotalCalls());
  CHECK(fib_args.size() > 1);
}

TEST_CASE("app order shuffles only on request and is seeded") {
  WorkloadSpec s;
  s.apps.resize(6);
  CHECK(AppOrder(s, 5) == std::vector<size_t>{0, 1, 2, 3, 4, 5});
  s.shuffle = true;
  std::vector<size_t> o = AppOrder(s, 5);
  CHECK(o == AppOrder(s, 5));
  std::vector<size_t> sorted = o;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<size_t>{0, 1, 2, 3, 4, 5});
  bool differs = false;
  for (uint64_t seed = 0; seed < 8; ++seed) differs |= AppOrder(s, seed) != o;
  CHECK(differs);
  CHECK(SplitMix64(1) != SplitMix64(2));
}

TEST_CASE("synthesized workloads are deterministic and overlap as asked") {
  SynthParams p;
  p.apps = 3;
  p.framework = 10;
  p.private_methods = 2;
  p.overlap = 0.6;
  p.calls = 5;
  p.seed = 7;
  WorkloadSpec a, b;
  Synthesize(p, &a);
  Synthesize(p, &b);
  CHECK(a.framework_text == b.framework_text);
  REQUIRE(a.apps.size() == 3);
  std::map<std::string, int> users;
  for (const AppSpec& app : a.apps) {
    CHECK(app.program_text == b.apps[&app - &a.apps[0]].program_text);
    for (const CallSpec& c : app.calls) {
      if (c.signature.rfind("fw.", 0) == 0) ++users[c.signature];
    }
  }
  int common = 0;
  for (const auto& [sig, n] : users) common += n == 3 ? 1 : 0;
  CHECK(common == 6);
  for (size_t i = 0; i < a.apps.size(); ++i) CHECK_NOTHROW(LoadAppProgram(a, i));
  p.seed = 8;
  WorkloadSpec c;
  Synthesize(p, &c);
  CHECK(c.framework_text != a.framework_text);
}

TEST_CASE("simulation runs are deterministic") {
  WorkloadSpec s = Tiny();
  // Interleaved turns bring both apps to the thresholds together.
  s.schedule = ScheduleKind::kSequential;
  ExperimentReport a = RunExperiment(s, SimConfig(s, RunMode::kShareJit));
  ExperimentReport b = RunExperiment(s, SimConfig(s, RunMode::kShareJit));
  ExperimentReport base = RunExperiment(s, SimConfig(s, RunMode::kBaseline));
  CHECK(GoldenJson(base, a) == GoldenJson(base, b));
  CHECK(a.TotalAdoptions() > 0);
  CHECK(a.TotalCompiles() < base.TotalCompiles());
  CHECK(a.processes[0].pid == 1001);
  CHECK(a.processes[0].attach == "claimed");
  CHECK(base.processes[0].attach == "none");
  CHECK(a.work_ratio > 0);
  CHECK(a.Y == doctest::Approx(TotalBenefit(a.AllCosts(), 20, 40)));
}

TEST_CASE("invalid thresholds are rejected before any work") {
  WorkloadSpec s = Tiny();
  RunConfig c = SimConfig(s, RunMode::kShareJit);
  c.thresholds.sharing = c.thresholds.hot;
  CHECK_THROWS_AS(RunExperiment(s, c), ConfigError);
  c = SimConfig(s, RunMode::kShareJit);
  c.region.segment_count = 0;
  CHECK_THROWS_AS(RunExperiment(s, c), RegionError);
}

TEST_CASE("reports are written and compared") {
  WorkloadSpec s = Tiny();
  fs::path d = Scratch("report");
  ExperimentReport a = RunExperiment(s, SimConfig(s, RunMode::kBaseline));
  ExperimentReport b = RunExperiment(s, SimConfig(s, RunMode::kShareJit));
  WriteReport(a, (d / "a").string());
  WriteReport(b, (d / "b").string());
  for (const char* f : {"report.json", "summary.txt", "processes.csv", "costs.csv", "events.jsonl"}) {
    CHECK(fs::exists(d / "b" / f));
  }
  std::string cmp = CompareReports((d / "a").string(), (d / "b" / "report.json").string());
  CHECK(cmp.find("compiles") != std::string::npos);
  CHECK(cmp.find("%") != std::string::npos);
  CHECK_THROWS(CompareReports((d / "missing").string(), (d / "b").string()));
  CHECK(ProcessesCsv(b).find("pid,") == 0);
  CHECK(SummaryText(b).find("tiny") != std::string::npos);
  fs::remove_all(d);
}

TEST_CASE("worker payloads round-trip") {
  WorkloadSpec s = Tiny();
  ExperimentReport r = RunExperiment(s, SimConfig(s, RunMode::kShareJit));
  const ProcessReport& p = r.processes[1];
  EventLog ev;
  ev.Raw("{\"ev\":\"x\"}");
  std::string payload = EncodeWorkerResult(p, ev);
  ProcessReport q;
  EventLog ev2;
  std::string err;
  REQUIRE(DecodeWorkerResult(payload, &q, &ev2, &err));
  CHECK(q.pid == p.pid);
  CHECK(q.app == p.app);
  CHECK(q.stats.compiles == p.stats.compiles);
  CHECK(q.stats.gc_modes == p.stats.gc_modes);
  REQUIRE(q.costs.size() == p.costs.size());
  for (size_t i = 0; i < q.costs.size(); ++i) {
    CHECK(q.costs[i].H == p.costs[i].H);
    CHECK(q.costs[i].Ti == p.costs[i].Ti);
    CHECK(q.costs[i].Tc == p.costs[i].Tc);
  }
  CHECK(ev2.lines() == ev.lines());
  CHECK_FALSE(DecodeWorkerResult("{not json", &q, &ev2, &err));
  CHECK_FALSE(err.empty());
}

TEST_CASE("sweep lists and tables") {
  CHECK(ParseStList("1000:10000:1000").size() == 10);
  CHECK(ParseStList("5,7,9") == std::vector<uint64_t>{5, 7, 9});
  CHECK_THROWS(ParseStList("10:1:1"));
  CHECK_THROWS(ParseStList("a,b"));
  CHECK_THROWS(ParseStList("1:10:0"));

  WorkloadSpec s = Tiny();
  RunConfig c = SimConfig(s, RunMode::kShareJit);
  std::vector<uint64_t> seen;
  auto rows = Sweep(s, c, {5, 10, 30}, [&](uint64_t st, const ExperimentReport& r) {
    seen.push_back(st);
    CHECK(r.config.thresholds.sharing == st);
  });
  CHECK(seen == std::vector<uint64_t>{5, 10, 30});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].st == 5);
  std::string csv = SweepCsv(rows);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(SweepTable(rows).find("30") != std::string::npos);
  CHECK(SweepSvg(rows).find("<svg") != std::string::npos);
  CHECK_THROWS_AS(Sweep(s, c, {40}), ConfigError);
}

TEST_CASE("golden files: skipped, updated, passing, failing with a diff") {
  fs::path d = Scratch("golden");
  fs::path spec = d / "tiny.spec";
  std::string text = kSpec;
  text.replace(text.find("../programs/framework.prog"), 26,
               testing::CorpusPath("programs/framework.prog"));
  std::ofstream(spec) << text;
  CHECK(GoldenPathFor(spec.string()) == (d / "tiny.golden.json").string());

  GoldenResult r = VerifyGolden(spec.string(), false);
  CHECK(r.status == GoldenStatus::kSkipped);
  r = VerifyGolden(spec.string(), true);
  CHECK(r.status == GoldenStatus::kUpdated);
  r = VerifyGolden(spec.string(), false);
  CHECK(r.status == GoldenStatus::kPass);

  std::ifstream in(r.golden_path);
  std::string golden((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  size_t at = golden.find("\"compiles\": ");
  REQUIRE(at != std::string::npos);
  golden.insert(at + 12, "9");
  std::ofstream(r.golden_path) << golden;
  r = VerifyGolden(spec.string(), false);
  CHECK(r.status == GoldenStatus::kFail);
  CHECK(r.message.find("-") != std::string::npos);
  CHECK(r.message.find("+") != std::string::npos);
  fs::remove_all(d);
}

TEST_CASE("line diff") {
  CHECK(LineDiff("a\nb\nc\n", "a\nb\nc\n").empty());
  std::string d = LineDiff("a\nb\nc\n", "a\nx\nc\n");
  CHECK(d.find("- b") != std::string::npos);
  CHECK(d.find("+ x") != std::string::npos);
  CHECK(d.find("- a") == std::string::npos);
}

}  // namespace
}  // namespace codeshare
