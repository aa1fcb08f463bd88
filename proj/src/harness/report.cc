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

#include "codeshare/harness/report.h"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

namespace codeshare {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json StatsJson(const ProcessStats& s) {
  uint64_t partial = 0, full = 0;
  for (GcMode m : s.gc_modes) (m == GcMode::kPartial ? partial : full)++;
  std::string modes;
  for (GcMode m : s.gc_modes) modes += m == GcMode::kPartial ? 'P' : 'F';
  return ordered_json{{"invocations", s.invocations},
                      {"compiled_invocations", s.compiled_invocations},
                      {"interp_steps", s.interp_steps},
                      {"fast_steps", s.fast_steps},
                      {"interp_ns", s.interp_ns},
                      {"compiled_ns", s.compiled_ns},
                      {"sharing_tasks", s.sharing_tasks},
                      {"sharing_hits", s.sharing_hits},
                      {"compile_tasks", s.compile_tasks},
                      {"compiles", s.compiles},
                      {"compile_discards", s.compile_discards},
                      {"total_compile_ns", s.total_compile_ns},
                      {"publishes", s.publishes},
                      {"publish_map_full", s.publish_map_full},
                      {"adoptions", s.adoptions},
                      {"deopts", s.deopts},
                      {"validity_failures", s.validity_failures},
                      {"osr_events", s.osr_events},
                      {"profiles_created", s.profiles_created},
                      {"freed_code_derefs", s.freed_code_derefs},
                      {"refcount_violations", s.refcount_violations},
                      {"gc_partial", partial},
                      {"gc_full", full},
                      {"gc_sequence", modes},
                      {"gc_bytes_freed", s.gc_bytes_freed},
                      {"gc_code_freed", s.gc_code_freed},
                      {"gc_kept_refcount", s.gc_kept_refcount},
                      {"gc_sharee_released", s.gc_sharee_released},
                      {"gc_dead_adoptions_released", s.gc_dead_adoptions_released},
                      {"arena_grows", s.arena_grows}};
}

ProcessStats StatsFromJson(const json& j) {
  ProcessStats s;
  s.invocations = j.at("invocations");
  s.compiled_invocations = j.at("compiled_invocations");
  s.interp_steps = j.at("interp_steps");
  s.fast_steps = j.at("fast_steps");
  s.interp_ns = j.at("interp_ns");
  s.compiled_ns = j.at("compiled_ns");
  s.sharing_tasks = j.at("sharing_tasks");
  s.sharing_hits = j.at("sharing_hits");
  s.compile_tasks = j.at("compile_tasks");
  s.compiles = j.at("compiles");
  s.compile_discards = j.at("compile_discards");
  s.total_compile_ns = j.at("total_compile_ns");
  s.publishes = j.at("publishes");
  s.publish_map_full = j.at("publish_map_full");
  s.adoptions = j.at("adoptions");
  s.deopts = j.at("deopts");
  s.validity_failures = j.at("validity_failures");
  s.osr_events = j.at("osr_events");
  s.profiles_created = j.at("profiles_created");
  s.freed_code_derefs = j.at("freed_code_derefs");
  s.refcount_violations = j.at("refcount_violations");
  for (char c : j.at("gc_sequence").get<std::string>()) {
    s.gc_modes.push_back(c == 'P' ? GcMode::kPartial : GcMode::kFull);
  }
  s.gc_bytes_freed = j.at("gc_bytes_freed");
  s.gc_code_freed = j.at("gc_code_freed");
  s.gc_kept_refcount = j.at("gc_kept_refcount");
  s.gc_sharee_released = j.at("gc_sharee_released");
  s.gc_dead_adoptions_released = j.at("gc_dead_adoptions_released");
  s.arena_grows = j.at("arena_grows");
  return s;
}

ordered_json CostJson(const CostRecord& r) {
  ordered_json j{{"method_hash", r.method_hash}, {"H", r.H}, {"L", r.L}};
  j["Ti"] = r.Ti ? json(*r.Ti) : json(nullptr);
  j["Tc"] = r.Tc ? json(*r.Tc) : json(nullptr);
  j["J"] = r.J;
  j["HC"] = r.HC;
  j["S"] = r.S;
  return j;
}

CostRecord CostFromJson(const json& j) {
  CostRecord r;
  r.method_hash = j.at("method_hash");
  r.H = j.at("H");
  r.L = j.at("L");
  if (!j.at("Ti").is_null()) r.Ti = j.at("Ti").get<double>();
  if (!j.at("Tc").is_null()) r.Tc = j.at("Tc").get<double>();
  r.J = j.at("J");
  r.HC = j.at("HC");
  r.S = j.at("S");
  return r;
}

ordered_json ProcessJson(const ProcessReport& p, bool with_costs) {
  ordered_json j{{"pid", p.pid},
                 {"app", p.app},
                 {"attach", p.attach},
                 {"segment", p.segment},
                 {"code_bytes", p.code_bytes},
                 {"data_bytes", p.data_bytes},
                 {"own_code", p.own_code_count},
                 {"sharee_code", p.sharee_code_count},
                 {"work_units", p.work_units},
                 {"wall_ns", p.wall_ns},
                 {"crashed", p.crashed},
                 {"error", p.error},
                 {"stats", StatsJson(p.stats)}};
  if (with_costs) {
    ordered_json costs = ordered_json::array();
    for (const CostRecord& r : p.costs) costs.push_back(CostJson(r));
    j["costs"] = std::move(costs);
  }
  return j;
}

ProcessReport ProcessFromJson(const json& j) {
  ProcessReport p;
  p.pid = j.at("pid");
  p.app = j.at("app");
  p.attach = j.at("attach");
  p.segment = j.at("segment");
  p.code_bytes = j.at("code_bytes");
  p.data_bytes = j.at("data_bytes");
  p.own_code_count = j.at("own_code");
  p.sharee_code_count = j.at("sharee_code");
  p.work_units = j.at("work_units");
  p.wall_ns = j.at("wall_ns");
  p.crashed = j.at("crashed");
  p.error = j.at("error");
  p.stats = StatsFromJson(j.at("stats"));
  if (j.contains("costs")) {
    for (const json& c : j.at("costs")) p.costs.push_back(CostFromJson(c));
  }
  return p;
}

ordered_json MapJson(const MapStatsRecord& m) {
  return ordered_json{{"entries", m.entries},
                      {"adoptions", m.adoptions},
                      {"overwrites", m.overwrites},
                      {"map_full_events", m.map_full_events},
                      {"publishes", m.publishes},
                      {"releases", m.releases},
                      {"invalidations", m.invalidations},
                      {"retired", m.retired},
                      {"dead_releases", m.dead_releases},
                      {"ledger_full_events", m.ledger_full_events},
                      {"reclaimed_nodes", m.reclaimed_nodes},
                      {"lookups", m.lookups},
                      {"hits", m.hits},
                      {"stale_adoptions", m.stale_adoptions}};
}

ordered_json TotalsJson(const ExperimentReport& r) {
  return ordered_json{{"code_bytes", r.TotalCodeBytes()},
                      {"data_bytes", r.TotalDataBytes()},
                      {"compiles", r.TotalCompiles()},
                      {"adoptions", r.TotalAdoptions()},
                      {"compile_ns", r.TotalCompileNs()},
                      {"work_units", r.TotalWorkUnits()},
                      {"wall_ns", r.TotalWallNs()}};
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ordered_json GoldenSide(const ExperimentReport& r) {
  ordered_json procs = ordered_json::array();
  for (const ProcessReport& p : r.processes) {
    uint64_t partial = 0, full = 0;
    for (GcMode m : p.stats.gc_modes) (m == GcMode::kPartial ? partial : full)++;
    procs.push_back(ordered_json{{"app", p.app},
                                 {"attach", p.attach},
                                 {"segment", p.segment},
                                 {"compiles", p.stats.compiles},
                                 {"adoptions", p.stats.adoptions},
                                 {"sharing_hits", p.stats.sharing_hits},
                                 {"publishes", p.stats.publishes},
                                 {"code_bytes", p.code_bytes},
                                 {"data_bytes", p.data_bytes},
                                 {"invocations", p.stats.invocations},
                                 {"compiled_invocations", p.stats.compiled_invocations},
                                 {"interp_steps", p.stats.interp_steps},
                                 {"fast_steps", p.stats.fast_steps},
                                 {"gc_partial", partial},
                                 {"gc_full", full},
                                 {"gc_bytes_freed", p.stats.gc_bytes_freed},
                                 {"gc_kept_refcount", p.stats.gc_kept_refcount},
                                 {"crashed", p.crashed}});
  }
  return ordered_json{{"processes", procs},
                      {"totals",
                       {{"code_bytes", r.TotalCodeBytes()},
                        {"data_bytes", r.TotalDataBytes()},
                        {"compiles", r.TotalCompiles()},
                        {"adoptions", r.TotalAdoptions()}}},
                      {"map", MapJson(r.map)}};
}

std::string Percent(double base, double value) {
  if (base == 0) return "n/a";
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << 100.0 * (value - base) / base << "%";
  return os.str();
}

}  // namespace

std::string ReportJson(const ExperimentReport& r) {
  ordered_json procs = ordered_json::array();
  for (const ProcessReport& p : r.processes) procs.push_back(ProcessJson(p, false));
  const Thresholds& t = r.config.thresholds;
  ordered_json j{
      {"spec", r.spec_name},
      {"mode", RunModeName(r.mode)},
      {"seed", r.seed},
      {"simulated", r.simulated},
      {"partial", r.partial},
      {"thresholds",
       {{"warm", t.warm}, {"sharing", t.sharing}, {"hot", t.hot}, {"osr", t.osr}}},
      {"segments", r.config.region.segment_count},
      {"segment_size", r.config.region.segment_size},
      {"gc_enabled", r.config.gc_enabled},
      {"processes", procs},
      {"map", MapJson(r.map)},
      {"totals", TotalsJson(r)},
      {"work_ratio", r.work_ratio},
      {"Y", r.Y}};
  return j.dump(2) + "\n";
}

std::string SummaryText(const ExperimentReport& r) {
  std::ostringstream os;
  const Thresholds& t = r.config.thresholds;
  os << "spec " << r.spec_name << "  mode " << RunModeName(r.mode) << "  seed " << r.seed
     << (r.simulated ? "  (simulated)" : "") << (r.partial ? "  PARTIAL: a worker crashed" : "")
     << "\n";
  os << "thresholds  ST " << t.sharing << "  HT " << t.hot << "  warm " << t.warm << "  gc "
     << (r.config.gc_enabled ? "on" : "off") << "\n\n";
  os << std::left << std::setw(12) << "app" << std::right << std::setw(9) << "attach"
     << std::setw(5) << "seg" << std::setw(11) << "code B" << std::setw(11) << "data B"
     << std::setw(9) << "compiles" << std::setw(8) << "adopts" << std::setw(14) << "J ns"
     << std::setw(14) << "work units" << std::setw(14) << "wall ns" << "\n";
  for (const ProcessReport& p : r.processes) {
    os << std::left << std::setw(12) << p.app << std::right << std::setw(9) << p.attach
       << std::setw(5) << p.segment << std::setw(11) << p.code_bytes << std::setw(11)
       << p.data_bytes << std::setw(9) << p.stats.compiles << std::setw(8) << p.stats.adoptions
       << std::setw(14) << p.stats.total_compile_ns << std::setw(14) << std::fixed
       << std::setprecision(0) << p.work_units << std::setw(14) << p.wall_ns
       << (p.crashed ? "  crashed: " + p.error : "") << "\n";
  }
  os << "\ntotals  code " << r.TotalCodeBytes() << " B  data " << r.TotalDataBytes()
     << " B  compiles " << r.TotalCompiles() << "  adoptions " << r.TotalAdoptions()
     << "  J " << r.TotalCompileNs() << " ns\n";
  os << "work ratio (fast step / interpreter step) " << std::setprecision(4) << r.work_ratio
     << "\n";
  os << "map  entries " << r.map.entries << "  adoptions " << r.map.adoptions << "  overwrites "
     << r.map.overwrites << "  map_full_events " << r.map.map_full_events << "\n";
  uint64_t partial = 0, full = 0, freed = 0, kept = 0;
  for (const ProcessReport& p : r.processes) {
    for (GcMode m : p.stats.gc_modes) (m == GcMode::kPartial ? partial : full)++;
    freed += p.stats.gc_bytes_freed;
    kept += p.stats.gc_kept_refcount;
  }
  os << "gc  partial " << partial << "  full " << full << "  bytes freed " << freed
     << "  kept (refcount) " << kept << "\n";
  os << "Y(ST=" << t.sharing << ") = " << FormatDouble(r.Y) << " ns\n";
  return os.str();
}

std::string ProcessesCsv(const ExperimentReport& r) {
  std::ostringstream os;
  os << "pid,app,attach,segment,code_bytes,data_bytes,compiles,compile_discards,compile_ns,"
        "adoptions,sharing_tasks,sharing_hits,deopts,validity_failures,invocations,"
        "interp_steps,fast_steps,work_units,wall_ns,gc_partial,gc_full,gc_bytes_freed,"
        "gc_kept_refcount,crashed\n";
  for (const ProcessReport& p : r.processes) {
    uint64_t partial = 0, full = 0;
    for (GcMode m : p.stats.gc_modes) (m == GcMode::kPartial ? partial : full)++;
    const ProcessStats& s = p.stats;
    os << p.pid << ',' << p.app << ',' << p.attach << ',' << p.segment << ',' << p.code_bytes
       << ',' << p.data_bytes << ',' << s.compiles << ',' << s.compile_discards << ','
       << s.total_compile_ns << ',' << s.adoptions << ',' << s.sharing_tasks << ','
       << s.sharing_hits << ',' << s.deopts << ',' << s.validity_failures << ','
       << s.invocations << ',' << s.interp_steps << ',' << s.fast_steps << ','
       << FormatDouble(p.work_units) << ',' << p.wall_ns << ',' << partial << ',' << full << ','
       << s.gc_bytes_freed << ',' << s.gc_kept_refcount << ',' << (p.crashed ? 1 : 0) << "\n";
  }
  return os.str();
}

void WriteReport(const ExperimentReport& r, const std::string& dir) {
  std::filesystem::path d(dir);
  std::filesystem::create_directories(d);
  WriteText(d / "report.json", ReportJson(r));
  WriteText(d / "summary.txt", SummaryText(r));
  WriteText(d / "processes.csv", ProcessesCsv(r));
  std::vector<CostRecord> costs = r.AllCosts();
  WriteText(d / "costs.csv", CostCsv(costs, r.config.thresholds.sharing, r.config.thresholds.hot));
  WriteText(d / "events.jsonl", r.events.Text());
}

std::string CompareReports(const std::string& a, const std::string& b) {
  auto load = [](const std::string& p) {
    std::string path = std::filesystem::is_directory(p) ? p + "/report.json" : p;
    return json::parse(ReadText(path));
  };
  json ja = load(a);
  json jb = load(b);
  std::ostringstream os;
  os << "A: " << ja.at("spec").get<std::string>() << " (" << ja.at("mode").get<std::string>()
     << ")   B: " << jb.at("spec").get<std::string>() << " ("
     << jb.at("mode").get<std::string>() << ")\n";
  os << std::left << std::setw(14) << "metric" << std::right << std::setw(18) << "A"
     << std::setw(18) << "B" << std::setw(12) << "B vs A" << "\n";
  for (const char* key :
       {"code_bytes", "data_bytes", "compiles", "adoptions", "compile_ns", "work_units",
        "wall_ns"}) {
    double va = ja.at("totals").at(key).get<double>();
    double vb = jb.at("totals").at(key).get<double>();
    os << std::left << std::setw(14) << key << std::right << std::setw(18)
       << FormatDouble(va) << std::setw(18) << FormatDouble(vb) << std::setw(12)
       << Percent(va, vb) << "\n";
  }
  double code_a = ja.at("totals").at("code_bytes").get<double>() +
                  ja.at("totals").at("data_bytes").get<double>();
  double code_b = jb.at("totals").at("code_bytes").get<double>() +
                  jb.at("totals").at("data_bytes").get<double>();
  os << std::left << std::setw(14) << "jit_cache" << std::right << std::setw(18)
     << FormatDouble(code_a) << std::setw(18) << FormatDouble(code_b) << std::setw(12)
     << Percent(code_a, code_b) << "\n";
  return os.str();
}

std::string EncodeWorkerResult(const ProcessReport& process, const EventLog& events) {
  ordered_json j{{"process", ProcessJson(process, true)}, {"events", events.lines()}};
  return j.dump();
}

bool DecodeWorkerResult(const std::string& payload, ProcessReport* process, EventLog* events,
                        std::string* error) {
  try {
    json j = json::parse(payload);
    *process = ProcessFromJson(j.at("process"));
    for (const json& line : j.at("events")) events->Raw(line.get<std::string>());
    return true;
  } catch (const std::exception& e) {
    if (error) *error = payload.empty() ? "empty payload" : e.what();
    return false;
  }
}

std::string GoldenJson(const ExperimentReport& baseline, const ExperimentReport& shared) {
  ordered_json j{{"spec", shared.spec_name},
                 {"seed", shared.seed},
                 {"baseline", GoldenSide(baseline)},
                 {"sharejit", GoldenSide(shared)}};
  return j.dump(2) + "\n";
}

std::string GoldenPathFor(const std::string& spec_path) {
  std::filesystem::path p(spec_path);
  p.replace_extension(".golden.json");
  return p.string();
}

std::string LineDiff(const std::string& expected, const std::string& actual) {
  auto lines = [](const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string l;
    while (std::getline(is, l)) out.push_back(l);
    return out;
  };
  std::vector<std::string> e = lines(expected);
  std::vector<std::string> a = lines(actual);
  // Longest common subsequence; goldens are a few hundred lines.
  std::vector<std::vector<uint32_t>> lcs(e.size() + 1, std::vector<uint32_t>(a.size() + 1, 0));
  for (size_t i = e.size(); i-- > 0;) {
    for (size_t k = a.size(); k-- > 0;) {
      lcs[i][k] = e[i] == a[k] ? lcs[i + 1][k + 1] + 1 : std::max(lcs[i + 1][k], lcs[i][k + 1]);
    }
  }
  std::ostringstream os;
  size_t i = 0, k = 0;
  while (i < e.size() || k < a.size()) {
    if (i < e.size() && k < a.size() && e[i] == a[k]) {
      ++i;
      ++k;
    } else if (k < a.size() && (i == e.size() || lcs[i][k + 1] >= lcs[i + 1][k])) {
      os << "+ " << a[k++] << "\n";
    } else {
      os << "- " << e[i++] << "\n";
    }
  }
  return os.str();
}

GoldenResult VerifyGolden(const std::string& spec_path, bool update) {
  GoldenResult result;
  result.golden_path = GoldenPathFor(spec_path);
  bool exists = std::filesystem::exists(result.golden_path);
  if (!exists && !update) {
    result.status = GoldenStatus::kSkipped;
    result.message = "no golden for " + spec_path + "; skipped";
    return result;
  }
  WorkloadSpec spec = LoadWorkload(spec_path);
  RunConfig config;
  config.simulate = true;
  ApplySpecConfig(spec, &config);
  config.mode = RunMode::kBaseline;
  ExperimentReport baseline = RunExperiment(spec, config);
  config.mode = RunMode::kShareJit;
  ExperimentReport shared = RunExperiment(spec, config);
  std::string actual = GoldenJson(baseline, shared);
  if (update) {
    WriteText(result.golden_path, actual);
    result.status = GoldenStatus::kUpdated;
    result.message = "wrote " + result.golden_path;
    return result;
  }
  std::string expected = ReadText(result.golden_path);
  if (expected == actual) {
    result.status = GoldenStatus::kPass;
    result.message = "matches " + result.golden_path;
    return result;
  }
  result.status = GoldenStatus::kFail;
  result.message = "mismatch against " + result.golden_path + "\n" + LineDiff(expected, actual);
  return result;
}

}  // namespace codeshare
