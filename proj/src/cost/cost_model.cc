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

#include "codeshare/cost/cost_model.h"

#include <charconv>
#include <sstream>

#include "codeshare/runtime/thresholds.h"

namespace codeshare {

std::optional<double> DeltaT(const CostRecord& r) {
  if (!r.Ti || !r.Tc) return std::nullopt;
  return *r.Ti - *r.Tc;
}

double Benefit(const CostRecord& r, uint64_t st, uint64_t ht) {
  if (!(st < ht)) throw ConfigError("sharing threshold must be below the hot threshold");
  if (r.HC < st) return 0.0;
  double s = r.S;
  double dt = DeltaT(r).value_or(0.0);
  double f = -r.H - r.L;
  if (r.HC < ht) return f + s * dt * static_cast<double>(r.HC - st);
  return f + s * dt * static_cast<double>(ht - st) + s * r.J;
}

double TotalBenefit(std::span<const CostRecord> records, uint64_t st, uint64_t ht) {
  double y = 0.0;
  for (const CostRecord& r : records) {
    if (r.HC >= st) y += Benefit(r, st, ht);
  }
  return y;
}

std::string FormatDouble(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string CostCsv(std::span<const CostRecord> records, uint64_t st, uint64_t ht) {
  std::ostringstream os;
  os << "method_hash,H,L,Ti,Tc,J,HC,S,F\n";
  for (const CostRecord& r : records) {
    os << r.method_hash << ',' << FormatDouble(r.H) << ',' << FormatDouble(r.L) << ','
       << (r.Ti ? FormatDouble(*r.Ti) : "") << ',' << (r.Tc ? FormatDouble(*r.Tc) : "") << ','
       << FormatDouble(r.J) << ',' << r.HC << ',' << r.S << ','
       << FormatDouble(Benefit(r, st, ht)) << '\n';
  }
  return os.str();
}

}  // namespace codeshare
