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

#include "codeshare/harness/workload.h"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace codeshare {

namespace {

std::vector<std::string> Words(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream is{std::string(line)};
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

class SpecLine {
 public:
  SpecLine(std::string_view origin, size_t line) : origin_(origin), line_(line) {}

  [[noreturn]] void Fail(const std::string& what) const {
    std::ostringstream os;
    os << origin_ << ":" << line_ << ": " << what;
    throw WorkloadError(os.str());
  }

  int64_t Int(std::string_view s) const {
    int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
      Fail("expected integer, got '" + std::string(s) + "'");
    }
    return v;
  }

  uint64_t Count(std::string_view s) const {
    int64_t v = Int(s);
    if (v < 0) Fail("expected a non-negative count, got '" + std::string(s) + "'");
    return static_cast<uint64_t>(v);
  }

  double Real(std::string_view s) const {
    try {
      size_t used = 0;
      double v = std::stod(std::string(s), &used);
      if (used != s.size()) Fail("expected number, got '" + std::string(s) + "'");
      return v;
    } catch (const std::logic_error&) {
      Fail("expected number, got '" + std::string(s) + "'");
    }
  }

  std::pair<std::string, std::string> KeyValue(const std::string& word) const {
    size_t eq = word.find('=');
    if (eq == std::string::npos || eq == 0) Fail("expected key=value, got '" + word + "'");
    return {word.substr(0, eq), word.substr(eq + 1)};
  }

 private:
  std::string_view origin_;
  size_t line_;
};

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WorkloadError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string Resolve(const std::string& base_dir, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p.string();
  return (std::filesystem::path(base_dir) / p).string();
}

// Arity-1 arithmetic method, optionally with a counted loop.
void EmitBody(std::ostringstream& os, const std::string& sig, uint64_t salt, uint32_t loop,
              bool call_mix) {
  int64_t c = static_cast<int64_t>(salt % 997) + 1;
  if (loop == 0) {
    os << "method " << sig << " regs=4 builtin=0\n"
       << "  CONST r1 " << c << "\n"
       << "  ADD r2 r0 r1\n";
    if (call_mix) {
      os << "  INVOKE 0 r2 r1 -> r2\n";
    } else {
      os << "  MUL r2 r2 r1\n";
    }
    os << "  RET r2\n";
    return;
  }
  os << "method " << sig << " regs=7 builtin=0\n"
     << "  CONST r1 0\n"
     << "  CONST r2 " << loop << "\n"
     << "  CONST r3 1\n"
     << "  CONST r6 " << c << "\n"
     << "  MOV r4 r0\n"
     << "  LT r5 r1 r2\n"
     << "  JMPZ r5 +5\n"
     << (call_mix ? "  INVOKE 0 r4 r6 -> r4\n" : "  ADD r4 r4 r6\n")
     << "  ADD r4 r4 r1\n"
     << "  ADD r1 r1 r3\n"
     << "  JMP -5\n"
     << "  RET r4\n";
}

}  // namespace

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

uint64_t AppSpec::TotalCalls() const {
  uint64_t n = 0;
  for (const CallSpec& c : calls) n += c.count;
  return n;
}

void Synthesize(const SynthParams& params, WorkloadSpec* spec) {
  if (params.apps == 0) throw WorkloadError("synth: apps must be positive");
  if (params.overlap < 0 || params.overlap > 1) throw WorkloadError("synth: overlap not in [0,1]");
  const uint32_t common =
      static_cast<uint32_t>(std::lround(params.overlap * static_cast<double>(params.framework)));

  std::ostringstream fw;
  fw << "framework\n"
     << "method fw.mix/2 regs=3 builtin=1\n"
     << "  ADD r2 r0 r1\n"
     << "  RET r2\n";
  std::vector<std::string> fw_sigs;
  for (uint32_t i = 0; i < params.framework; ++i) {
    std::string sig = "fw.m" + std::to_string(i) + "/1";
    EmitBody(fw, sig, SplitMix64(params.seed ^ (uint64_t{i} << 20)), params.loop, i % 3 == 2);
    fw_sigs.push_back(sig);
  }
  spec->framework_text = fw.str();
  spec->framework_origin = "<synth framework>";

  spec->apps.clear();
  for (uint32_t a = 0; a < params.apps; ++a) {
    AppSpec app;
    app.name = "app" + std::to_string(a);
    app.program_origin = "<synth " + app.name + ">";
    std::vector<std::string> targets(fw_sigs.begin(), fw_sigs.begin() + common);
    for (uint32_t i = common; i < params.framework; ++i) {
      if ((i - common) % params.apps == a) targets.push_back(fw_sigs[i]);
    }
    std::ostringstream os;
    os << "app\n";
    for (uint32_t j = 0; j < params.private_methods; ++j) {
      std::string sig = app.name + ".p" + std::to_string(j) + "/1";
      uint64_t salt = SplitMix64(params.seed ^ (uint64_t{a} << 40) ^ (uint64_t{j} << 8) ^ 0x5a);
      EmitBody(os, sig, salt, params.loop, false);
      targets.push_back(sig);
    }
    app.program_text = params.private_methods ? os.str() : "";
    for (size_t t = 0; t < targets.size(); ++t) {
      CallSpec c;
      c.signature = targets[t];
      c.count = params.calls;
      c.args = {static_cast<Value>(t)};
      c.vary = 16;
      c.seed = SplitMix64(params.seed + a * 131 + t);
      app.calls.push_back(std::move(c));
    }
    spec->apps.push_back(std::move(app));
  }
}

WorkloadSpec ParseWorkload(std::string_view text, std::string_view origin,
                           const std::string& base_dir) {
  WorkloadSpec spec;
  spec.name = std::filesystem::path(std::string(origin)).stem().string();
  bool synth = false;
  bool explicit_parts = false;
  std::map<std::string, size_t> app_index;

  std::istringstream in{std::string(text)};
  std::string raw;
  size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (size_t h = raw.find('#'); h != std::string::npos) raw.resize(h);
    auto w = Words(raw);
    if (w.empty()) continue;
    SpecLine p(origin, line_no);
    const std::string& head = w[0];
    if (head == "workload") {
      if (w.size() != 2) p.Fail("expected: workload <name>");
      spec.name = w[1];
    } else if (head == "framework") {
      if (w.size() != 2) p.Fail("expected: framework <path>");
      std::string path = Resolve(base_dir, w[1]);
      spec.framework_text = ReadFile(path);
      spec.framework_origin = path;
      explicit_parts = true;
    } else if (head == "app") {
      if (w.size() < 2 || w.size() > 3) p.Fail("expected: app <name> [<path>]");
      if (app_index.count(w[1])) p.Fail("duplicate app " + w[1]);
      AppSpec app;
      app.name = w[1];
      if (w.size() == 3) {
        std::string path = Resolve(base_dir, w[2]);
        app.program_text = ReadFile(path);
        app.program_origin = path;
      }
      app_index[app.name] = spec.apps.size();
      spec.apps.push_back(std::move(app));
      explicit_parts = true;
    } else if (head == "call") {
      if (w.size() < 4) p.Fail("expected: call <app> <name>/<arity> count=<n> ...");
      auto it = app_index.find(w[1]);
      if (it == app_index.end()) p.Fail("unknown app " + w[1]);
      CallSpec c;
      c.signature = w[2];
      bool have_count = false;
      for (size_t k = 3; k < w.size(); ++k) {
        auto [key, value] = p.KeyValue(w[k]);
        if (key == "count") {
          c.count = p.Count(value);
          have_count = true;
        } else if (key == "args") {
          size_t start = 0;
          while (start <= value.size()) {
            size_t comma = value.find(',', start);
            if (comma == std::string::npos) comma = value.size();
            c.args.push_back(p.Int(std::string_view(value).substr(start, comma - start)));
            start = comma + 1;
          }
        } else if (key == "vary") {
          c.vary = p.Count(value);
        } else if (key == "seed") {
          c.seed = p.Count(value);
        } else {
          p.Fail("unknown call option " + key);
        }
      }
      if (!have_count) p.Fail("call needs count=<n>");
      spec.apps[it->second].calls.push_back(std::move(c));
      explicit_parts = true;
    } else if (head == "schedule") {
      if (w.size() < 2) p.Fail("expected: schedule sequential|interleaved ...");
      if (w[1] == "sequential") {
        spec.schedule = ScheduleKind::kSequential;
      } else if (w[1] == "interleaved") {
        spec.schedule = ScheduleKind::kInterleaved;
      } else {
        p.Fail("unknown schedule " + w[1]);
      }
      for (size_t k = 2; k < w.size(); ++k) {
        auto [key, value] = p.KeyValue(w[k]);
        if (key == "chunk") {
          spec.chunk = p.Count(value);
          if (spec.chunk == 0) p.Fail("chunk must be positive");
        } else if (key == "shuffle") {
          spec.shuffle = p.Count(value) != 0;
        } else if (key == "order_seed") {
          spec.order_seed = p.Count(value);
        } else {
          p.Fail("unknown schedule option " + key);
        }
      }
    } else if (head == "config") {
      if (w.size() < 2) p.Fail("expected: config <key>=<value> ...");
      for (size_t k = 1; k < w.size(); ++k) {
        auto [key, value] = p.KeyValue(w[k]);
        spec.config[key] = value;
      }
    } else if (head == "synth") {
      if (synth) p.Fail("duplicate synth line");
      synth = true;
      SynthParams sp;
      for (size_t k = 1; k < w.size(); ++k) {
        auto [key, value] = p.KeyValue(w[k]);
        if (key == "apps") {
          sp.apps = static_cast<uint32_t>(p.Count(value));
        } else if (key == "framework") {
          sp.framework = static_cast<uint32_t>(p.Count(value));
        } else if (key == "private") {
          sp.private_methods = static_cast<uint32_t>(p.Count(value));
        } else if (key == "overlap") {
          sp.overlap = p.Real(value);
        } else if (key == "calls") {
          sp.calls = p.Count(value);
        } else if (key == "loop") {
          sp.loop = static_cast<uint32_t>(p.Count(value));
        } else if (key == "seed") {
          sp.seed = p.Count(value);
        } else {
          p.Fail("unknown synth option " + key);
        }
      }
      try {
        Synthesize(sp, &spec);
      } catch (const WorkloadError& e) {
        p.Fail(e.what());
      }
    } else {
      p.Fail("unknown directive " + head);
    }
  }
  if (synth && explicit_parts) {
    throw WorkloadError(std::string(origin) + ": synth excludes framework/app/call lines");
  }
  if (spec.apps.empty()) throw WorkloadError(std::string(origin) + ": no apps");
  if (spec.framework_text.empty()) {
    throw WorkloadError(std::string(origin) + ": no framework program");
  }
  return spec;
}

WorkloadSpec LoadWorkload(const std::string& path) {
  std::string dir = std::filesystem::path(path).parent_path().string();
  return ParseWorkload(ReadFile(path), path, dir);
}

SymbolTable LoadAppProgram(const WorkloadSpec& spec, size_t app) {
  const AppSpec& a = spec.apps.at(app);
  ProgramDesc fw = ParseProgram(spec.framework_text, spec.framework_origin);
  ProgramDesc prog;
  if (!a.program_text.empty()) prog = ParseProgram(a.program_text, a.program_origin);
  SymbolTable table = LoadProgram(fw, prog);
  for (const CallSpec& c : a.calls) {
    auto sym = table.Find(c.signature);
    if (!sym) throw WorkloadError(a.name + ": call to unknown symbol " + c.signature);
    if (c.args.size() > table.at(*sym).arity) {
      throw WorkloadError(a.name + ": too many arguments for " + c.signature);
    }
  }
  return table;
}

CallStream::CallStream(const AppSpec& app, const SymbolTable& symbols, uint64_t seed)
    : app_(&app), seed_(seed), remaining_(app.TotalCalls()) {
  for (const CallSpec& c : app.calls) {
    auto sym = symbols.Find(c.signature);
    if (!sym) throw WorkloadError(app.name + ": call to unknown symbol " + c.signature);
    symbols_.push_back(*sym);
    arities_.push_back(symbols.at(*sym).arity);
  }
  while (call_ < app_->calls.size() && app_->calls[call_].count == 0) ++call_;
}

Invocation CallStream::Next() {
  if (Done()) throw WorkloadError(app_->name + ": call stream exhausted");
  const CallSpec& c = app_->calls[call_];
  Invocation inv;
  inv.symbol = symbols_[call_];
  inv.args.assign(arities_[call_], 0);
  for (size_t k = 0; k < c.args.size() && k < inv.args.size(); ++k) inv.args[k] = c.args[k];
  if (c.vary > 0 && !inv.args.empty()) {
    uint64_t draw = c.seed ? SplitMix64(*c.seed ^ seed_ ^ (k_ * 0x2545f4914f6cdd1dull)) : k_;
    inv.args[0] += static_cast<Value>(draw % c.vary);
  }
  --remaining_;
  if (++k_ == c.count) {
    k_ = 0;
    ++call_;
    while (call_ < app_->calls.size() && app_->calls[call_].count == 0) ++call_;
  }
  return inv;
}

std::vector<size_t> AppOrder(const WorkloadSpec& spec, uint64_t seed) {
  std::vector<size_t> order(spec.apps.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (!spec.shuffle) return order;
  // Fisher-Yates over mt19937_64, whose output sequence is fixed by the
  // standard; the modulo draw keeps the permutation reproducible everywhere.
  std::mt19937_64 rng(SplitMix64(seed ^ spec.order_seed));
  for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  return order;
}

}  // namespace codeshare
