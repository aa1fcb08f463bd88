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

#ifndef CODESHARE_HARNESS_WORKLOAD_H_
#define CODESHARE_HARNESS_WORKLOAD_H_

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "codeshare/vm/bytecode.h"
#include "codeshare/vm/program.h"

namespace codeshare {

class WorkloadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// `count` top-level calls of one method. Arguments are `args` (zero-filled to
// the arity); with vary=n the first argument is offset by k mod n for the
// k-th call, or by a seeded pseudo-random draw mod n when a seed is given.
struct CallSpec {
  std::string signature;
  uint64_t count = 0;
  std::vector<Value> args;
  uint64_t vary = 0;
  std::optional<uint64_t> seed;
};

struct AppSpec {
  std::string name;
  std::string program_text;  // app section only; may be empty
  std::string program_origin;
  std::vector<CallSpec> calls;

  uint64_t TotalCalls() const;
};

enum class ScheduleKind { kSequential, kInterleaved };

struct WorkloadSpec {
  std::string name;
  std::string framework_text;
  std::string framework_origin;
  std::vector<AppSpec> apps;
  ScheduleKind schedule = ScheduleKind::kSequential;
  uint64_t chunk = 1;       // interleaved: calls per turn
  uint64_t order_seed = 0;  // mixed into the app-order shuffle
  bool shuffle = false;     // randomize the app order
  // Defaults for run options ("config" lines); command-line flags win.
  std::map<std::string, std::string> config;
};

// Grammar, one directive per line, '#' comments:
//   workload <name>
//   framework <path>                      relative to the spec file
//   app <name> [<path>]                   app section program, optional
//   call <app> <name>/<arity> count=<n> [args=<v>,..] [vary=<n>] [seed=<n>]
//   schedule sequential|interleaved [chunk=<n>] [shuffle=0|1] [order_seed=<n>]
//   config <key>=<value> ...
//   synth apps=<n> framework=<n> private=<n> overlap=<0..1> calls=<n>
//         [loop=<n>] [seed=<n>]
// `synth` generates the framework, the apps and their calls; it excludes
// framework/app/call lines.
WorkloadSpec ParseWorkload(std::string_view text, std::string_view origin,
                           const std::string& base_dir);
WorkloadSpec LoadWorkload(const std::string& path);

// Parameters of a generated workload. Each app calls round(overlap * framework)
// common framework methods, its own share of the remaining framework methods,
// and `private_methods` methods of its own, `calls` times each.
struct SynthParams {
  uint32_t apps = 2;
  uint32_t framework = 8;
  uint32_t private_methods = 2;
  double overlap = 0.5;
  uint64_t calls = 100;
  uint32_t loop = 0;  // loop trip count inside generated methods
  uint64_t seed = 1;
};
void Synthesize(const SynthParams& params, WorkloadSpec* spec);

// Loaded program of one app (framework first).
SymbolTable LoadAppProgram(const WorkloadSpec& spec, size_t app);

// One top-level invocation.
struct Invocation {
  uint16_t symbol = 0;
  std::vector<Value> args;
};

// Enumerates an app's invocations in order.
class CallStream {
 public:
  CallStream(const AppSpec& app, const SymbolTable& symbols, uint64_t seed);
  bool Done() const { return call_ >= app_->calls.size(); }
  Invocation Next();
  uint64_t remaining() const { return remaining_; }

 private:
  const AppSpec* app_;
  std::vector<uint16_t> symbols_;
  std::vector<uint16_t> arities_;
  uint64_t seed_;
  size_t call_ = 0;
  uint64_t k_ = 0;
  uint64_t remaining_ = 0;
};

// Order in which apps start (sequential) or take turns (interleaved).
std::vector<size_t> AppOrder(const WorkloadSpec& spec, uint64_t seed);

// Mixes a seed with a counter; stable across platforms.
uint64_t SplitMix64(uint64_t x);

}  // namespace codeshare

#endif  // CODESHARE_HARNESS_WORKLOAD_H_
