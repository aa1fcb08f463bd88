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

#ifndef CODESHARE_COST_COST_MODEL_H_
#define CODESHARE_COST_COST_MODEL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace codeshare {

// Per-method measurements of one process, all times in nanoseconds.
//   H   hash-identification cost      L   sharing-map lookup cost
//   Ti  mean interpreted invocation   Tc  mean compiled invocation
//   J   compile time                  HC  final hotness
//   S   1 if a sharing lookup hit
struct CostRecord {
  std::string method_hash;
  double H = 0;
  double L = 0;
  std::optional<double> Ti;
  std::optional<double> Tc;
  double J = 0;
  uint64_t HC = 0;
  int S = 0;
};

// Ti - Tc; unset unless both were measured. Negative values are kept.
std::optional<double> DeltaT(const CostRecord& r);

// Per-method benefit of sharing at thresholds (st, ht):
//   HC < st         0
//   st <= HC < ht   -H - L + S * dT * (HC - st)
//   HC >= ht        -H - L + S * dT * (ht - st) + S * J
// An unmeasured dT contributes nothing. Throws ConfigError unless st < ht.
double Benefit(const CostRecord& r, uint64_t st, uint64_t ht);

// Sum of Benefit over the records with HC >= st.
double TotalBenefit(std::span<const CostRecord> records, uint64_t st, uint64_t ht);

// "method_hash,H,L,Ti,Tc,J,HC,S,F" followed by one row per record; unmeasured
// times are empty fields.
std::string CostCsv(std::span<const CostRecord> records, uint64_t st, uint64_t ht);

// Shortest decimal text that reads back to exactly `v`.
std::string FormatDouble(double v);

}  // namespace codeshare

#endif  // CODESHARE_COST_COST_MODEL_H_
