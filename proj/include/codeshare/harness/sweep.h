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

#ifndef CODESHARE_HARNESS_SWEEP_H_
#define CODESHARE_HARNESS_SWEEP_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "codeshare/harness/runner.h"

namespace codeshare {

struct SweepRow {
  uint64_t st = 0;
  double Y = 0;
  uint64_t cache_bytes = 0;  // code + data over all processes
  uint64_t compile_ns = 0;
  uint64_t compiles = 0;
  uint64_t adoptions = 0;
  double work_units = 0;
  bool partial = false;
};

// One sharing-mode run per sharing threshold; every value must be below the
// hot threshold. `each` (optional) sees every run's report.
std::vector<SweepRow> Sweep(const WorkloadSpec& spec, const RunConfig& config,
                            const std::vector<uint64_t>& st_list,
                            const std::function<void(uint64_t, const ExperimentReport&)>& each = {});

std::string SweepCsv(const std::vector<SweepRow>& rows);
// Aligned table with a bar for Y.
std::string SweepTable(const std::vector<SweepRow>& rows);
// Minimal SVG line plot of Y against ST.
std::string SweepSvg(const std::vector<SweepRow>& rows);

// Parses "1000,2000,..." or "1000:10000:1000" (first:last:step).
std::vector<uint64_t> ParseStList(const std::string& text);

}  // namespace codeshare

#endif  // CODESHARE_HARNESS_SWEEP_H_
