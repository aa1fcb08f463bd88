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

// codeshare: experiment driver.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "codeshare/harness/report.h"
#include "codeshare/harness/runner.h"
#include "codeshare/harness/sweep.h"

namespace cs = codeshare;

namespace {

struct RunFlags {
  std::string mode = "sharejit";
  std::string spec;
  std::string out;
  std::string region;
  std::string gc;
  uint64_t seed = 0;
  uint32_t segments = 0;
  uint64_t segment_size = 0;
  uint64_t st = 0;
  uint64_t ht = 0;
  bool sim = false;
};

void AddRunFlags(CLI::App* cmd, RunFlags* f, bool with_mode) {
  if (with_mode) {
    cmd->add_option("--mode", f->mode, "baseline or sharejit")
        ->check(CLI::IsMember({"baseline", "sharejit"}));
  }
  cmd->add_option("--spec", f->spec, "workload spec file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", f->seed, "schedule and argument seed");
  cmd->add_option("--segments", f->segments, "cache segments in the shared region (<= 64)");
  cmd->add_option("--segment-size", f->segment_size, "bytes per segment");
  cmd->add_option("--sharing-threshold", f->st, "hotness at which to look up shared code");
  cmd->add_option("--hot-threshold", f->ht, "hotness at which to compile");
  cmd->add_option("--gc", f->gc, "on or off")->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--region", f->region, "region file (real processes only)");
  cmd->add_flag("--sim", f->sim, "simulate all workers in one process");
  cmd->add_option("--out", f->out, "output directory")->required();
}

cs::RunConfig BuildConfig(const cs::WorkloadSpec& spec, const RunFlags& f, CLI::App* cmd) {
  cs::RunConfig c;
  cs::ApplySpecConfig(spec, &c);
  c.mode = f.mode == "baseline" ? cs::RunMode::kBaseline : cs::RunMode::kShareJit;
  if (cmd->count("--seed")) c.seed = f.seed;
  if (cmd->count("--segments")) c.region.segment_count = f.segments;
  if (cmd->count("--segment-size")) c.region.segment_size = f.segment_size;
  if (cmd->count("--sharing-threshold")) c.thresholds.sharing = f.st;
  if (cmd->count("--hot-threshold")) c.thresholds.hot = f.ht;
  if (cmd->count("--gc")) c.gc_enabled = f.gc == "on";
  c.simulate = f.sim;
  c.region_path = f.region;
  return c;
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-process JIT code sharing runtime and experiment harness"};
  app.require_subcommand(1);

  // create
  std::string create_path;
  cs::RegionConfig create_cfg;
  CLI::App* create = app.add_subcommand("create", "create a shared region file");
  create->add_option("--region", create_path, "region file to create")->required();
  create->add_option("--segments", create_cfg.segment_count, "cache segments (<= 64)");
  create->add_option("--segment-size", create_cfg.segment_size, "bytes per segment");
  create->add_option("--map-capacity", create_cfg.map_capacity, "sharing-map nodes");

  // run
  RunFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "run a workload in one mode");
  AddRunFlags(run, &run_flags, true);

  // sweep
  RunFlags sweep_flags;
  std::string st_list = "1000:10000:1000";
  bool plot = false;
  CLI::App* sweep = app.add_subcommand("sweep", "sweep the sharing threshold");
  AddRunFlags(sweep, &sweep_flags, false);
  sweep->add_option("--st-list", st_list, "comma list or first:last:step");
  sweep->add_flag("--plot", plot, "also write sweep.svg");

  // report
  std::vector<std::string> compare;
  std::string show;
  CLI::App* report = app.add_subcommand("report", "print or compare reports");
  report->add_option("--compare", compare, "two report directories")->expected(2);
  report->add_option("dir", show, "report directory to print");

  // verify-golden
  std::vector<std::string> golden_specs;
  bool update = false;
  CLI::App* golden = app.add_subcommand("verify-golden", "check specs against their goldens");
  golden->add_option("specs", golden_specs, "spec files")->required()->check(CLI::ExistingFile);
  golden->add_flag("--update", update, "rewrite the golden files from a fresh run");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*create) {
      auto region = cs::SharedRegion::CreateFile(create_path, create_cfg);
      std::cout << "created " << create_path << ": " << region->segment_count() << " segments of "
                << region->segment_size() << " B, " << region->size() << " B total\n";
      return 0;
    }
    if (*run) {
      cs::WorkloadSpec spec = cs::LoadWorkload(run_flags.spec);
      cs::RunConfig config = BuildConfig(spec, run_flags, run);
      cs::ExperimentReport r = cs::RunExperiment(spec, config);
      cs::WriteReport(r, run_flags.out);
      std::cout << cs::SummaryText(r);
      return r.partial ? 2 : 0;
    }
    if (*sweep) {
      cs::WorkloadSpec spec = cs::LoadWorkload(sweep_flags.spec);
      cs::RunConfig config = BuildConfig(spec, sweep_flags, sweep);
      std::vector<uint64_t> sts = cs::ParseStList(st_list);
      std::filesystem::path out(sweep_flags.out);
      std::filesystem::create_directories(out);
      auto rows = cs::Sweep(spec, config, sts, [&](uint64_t st, const cs::ExperimentReport& r) {
        cs::WriteReport(r, (out / ("st_" + std::to_string(st))).string());
      });
      WriteFile(out / "sweep.csv", cs::SweepCsv(rows));
      std::string table = cs::SweepTable(rows);
      WriteFile(out / "sweep.txt", table);
      if (plot) WriteFile(out / "sweep.svg", cs::SweepSvg(rows));
      std::cout << table;
      return 0;
    }
    if (*report) {
      if (compare.size() == 2) {
        std::cout << cs::CompareReports(compare[0], compare[1]);
        return 0;
      }
      if (show.empty()) {
        std::cerr << "report: give a directory or --compare A B\n";
        return 1;
      }
      std::ifstream in(std::filesystem::path(show) / "summary.txt");
      if (!in) {
        std::cerr << "report: no summary.txt in " << show << "\n";
        return 1;
      }
      std::cout << in.rdbuf();
      return 0;
    }
    if (*golden) {
      int failures = 0;
      for (const std::string& s : golden_specs) {
        cs::GoldenResult g = cs::VerifyGolden(s, update);
        const char* tag = g.status == cs::GoldenStatus::kPass      ? "PASS"
                          : g.status == cs::GoldenStatus::kFail    ? "FAIL"
                          : g.status == cs::GoldenStatus::kUpdated ? "UPDATED"
                                                                   : "SKIP";
        std::cout << tag << " " << s << ": " << g.message << "\n";
        if (g.status == cs::GoldenStatus::kFail) ++failures;
      }
      return failures ? 1 : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
