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

#ifndef CODESHARE_HARNESS_REPORT_H_
#define CODESHARE_HARNESS_REPORT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "codeshare/harness/runner.h"

namespace codeshare {

// Full report as pretty-printed JSON.
std::string ReportJson(const ExperimentReport& report);
// Human-readable summary.
std::string SummaryText(const ExperimentReport& report);
// One row per process.
std::string ProcessesCsv(const ExperimentReport& report);

// Writes report.json, summary.txt, processes.csv, costs.csv and events.jsonl
// into `dir` (created if missing).
void WriteReport(const ExperimentReport& report, const std::string& dir);

// Side-by-side totals of two report directories (or report.json files) with
// the relative change from A to B.
std::string CompareReports(const std::string& a, const std::string& b);

// Worker-to-parent payload in real-process runs.
std::string EncodeWorkerResult(const ProcessReport& process, const EventLog& events);
bool DecodeWorkerResult(const std::string& payload, ProcessReport* process, EventLog* events,
                        std::string* error);

// Golden files hold the deterministic part of baseline and sharing runs in
// simulation mode: per-process compile, adoption and byte counts, plus map
// and collector counters. They live beside the spec as <spec>.golden.json.
std::string GoldenJson(const ExperimentReport& baseline, const ExperimentReport& shared);

enum class GoldenStatus { kPass, kFail, kSkipped, kUpdated };

struct GoldenResult {
  GoldenStatus status = GoldenStatus::kSkipped;
  std::string golden_path;
  std::string message;  // diff on failure, notice when skipped
};

std::string GoldenPathFor(const std::string& spec_path);

// Runs the spec in simulation mode (both modes, seed 0 unless the spec
// config sets one) and compares with the golden file. With `update` the
// golden is rewritten instead.
GoldenResult VerifyGolden(const std::string& spec_path, bool update);

// Line diff of two texts: "-" lines only in `expected`, "+" only in `actual`.
std::string LineDiff(const std::string& expected, const std::string& actual);

}  // namespace codeshare

#endif  // CODESHARE_HARNESS_REPORT_H_
