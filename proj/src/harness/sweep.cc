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

#include "codeshare/harness/sweep.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace codeshare {

namespace {

uint64_t ParseCount(std::string_view s) {
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
    throw ConfigError("bad threshold '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<uint64_t> ParseStList(const std::string& text) {
  std::vector<uint64_t> out;
  if (std::count(text.begin(), text.end(), ':') == 2) {
    size_t a = text.find(':');
    size_t b = text.find(':', a + 1);
    uint64_t first = ParseCount(std::string_view(text).substr(0, a));
    uint64_t last = ParseCount(std::string_view(text).substr(a + 1, b - a - 1));
    uint64_t step = ParseCount(std::string_view(text).substr(b + 1));
    if (step == 0 || last < first) throw ConfigError("bad range " + text);
    for (uint64_t v = first; v <= last; v += step) out.push_back(v);
    return out;
  }
  size_t start = 0;
  while (start <= text.size()) {
    size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    out.push_back(ParseCount(std::string_view(text).substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

std::vector<SweepRow> Sweep(const WorkloadSpec& spec, const RunConfig& config,
                            const std::vector<uint64_t>& st_list,
                            const std::function<void(uint64_t, const ExperimentReport&)>& each) {
  for (uint64_t st : st_list) {
    Thresholds t = config.thresholds;
    t.sharing = st;
    t.Validate();
  }
  std::vector<SweepRow> rows;
  for (uint64_t st : st_list) {
    RunConfig c = config;
    c.mode = RunMode::kShareJit;
    c.thresholds.sharing = st;
    ExperimentReport r = RunExperiment(spec, c);
    SweepRow row;
    row.st = st;
    row.Y = r.Y;
    row.cache_bytes = r.TotalCodeBytes() + r.TotalDataBytes();
    row.compile_ns = r.TotalCompileNs();
    row.compiles = r.TotalCompiles();
    row.adoptions = r.TotalAdoptions();
    row.work_units = r.TotalWorkUnits();
    row.partial = r.partial;
    rows.push_back(row);
    if (each) each(st, r);
  }
  return rows;
}

std::string SweepCsv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "ST,Y,cache_bytes,compile_ns,compiles,adoptions,work_units,partial\n";
  for (const SweepRow& r : rows) {
    os << r.st << ',' << FormatDouble(r.Y) << ',' << r.cache_bytes << ',' << r.compile_ns << ','
       << r.compiles << ',' << r.adoptions << ',' << FormatDouble(r.work_units) << ','
       << (r.partial ? 1 : 0) << "\n";
  }
  return os.str();
}

std::string SweepTable(const std::vector<SweepRow>& rows) {
  double lo = 0, hi = 0;
  for (const SweepRow& r : rows) {
    lo = std::min(lo, r.Y);
    hi = std::max(hi, r.Y);
  }
  double span = hi - lo > 0 ? hi - lo : 1;
  std::ostringstream os;
  os << std::right << std::setw(8) << "ST" << std::setw(16) << "Y (ns)" << std::setw(12)
     << "cache B" << std::setw(14) << "J ns" << std::setw(9) << "compiles" << std::setw(8)
     << "adopts" << std::setw(14) << "work units" << "  Y\n";
  for (const SweepRow& r : rows) {
    int bar = static_cast<int>(std::lround(30.0 * (r.Y - lo) / span));
    os << std::setw(8) << r.st << std::setw(16) << std::fixed << std::setprecision(0) << r.Y
       << std::setw(12) << r.cache_bytes << std::setw(14) << r.compile_ns << std::setw(9)
       << r.compiles << std::setw(8) << r.adoptions << std::setw(14) << r.work_units << "  "
       << std::string(static_cast<size_t>(bar), '#') << (r.partial ? "  (partial)" : "")
       << "\n";
  }
  return os.str();
}

std::string SweepSvg(const std::vector<SweepRow>& rows) {
  const double w = 640, h = 360, pad = 50;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (rows.empty()) {
    os << "</svg>\n";
    return os.str();
  }
  double xlo = static_cast<double>(rows.front().st), xhi = xlo;
  double ylo = rows.front().Y, yhi = ylo;
  for (const SweepRow& r : rows) {
    xlo = std::min(xlo, static_cast<double>(r.st));
    xhi = std::max(xhi, static_cast<double>(r.st));
    ylo = std::min(ylo, r.Y);
    yhi = std::max(yhi, r.Y);
  }
  double xs = xhi > xlo ? xhi - xlo : 1;
  double ys = yhi > ylo ? yhi - ylo : 1;
  auto px = [&](double x) { return pad + (x - xlo) / xs * (w - 2 * pad); };
  auto py = [&](double y) { return h - pad - (y - ylo) / ys * (h - 2 * pad); };
  os << "<line x1=\"" << pad << "\" y1=\"" << h - pad << "\" x2=\"" << w - pad << "\" y2=\""
     << h - pad << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << h - pad
     << "\" stroke=\"black\"/>\n<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" "
        "points=\"";
  for (const SweepRow& r : rows) os << px(static_cast<double>(r.st)) << ',' << py(r.Y) << ' ';
  os << "\"/>\n";
  for (const SweepRow& r : rows) {
    os << "<text x=\"" << px(static_cast<double>(r.st)) << "\" y=\"" << h - pad + 16
       << "\" font-size=\"10\" text-anchor=\"middle\">" << r.st << "</text>\n";
  }
  os << "<text x=\"" << w / 2 << "\" y=\"" << h - 8
     << "\" font-size=\"12\" text-anchor=\"middle\">sharing threshold</text>\n"
     << "<text x=\"14\" y=\"" << h / 2
     << "\" font-size=\"12\" transform=\"rotate(-90 14," << h / 2 << ")\">Y (ns)</text>\n"
     << "</svg>\n";
  return os.str();
}

}  // namespace codeshare
