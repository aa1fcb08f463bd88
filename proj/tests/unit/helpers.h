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

#ifndef CODESHARE_TESTS_UNIT_HELPERS_H_
#define CODESHARE_TESTS_UNIT_HELPERS_H_

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "codeshare/cache/region.h"
#include "codeshare/common/clock.h"
#include "codeshare/runtime/process.h"
#include "codeshare/vm/program.h"

namespace codeshare::testing {

inline std::string CorpusPath(const std::string& rel) {
  return std::string(CODESHARE_CORPUS_DIR) + "/" + rel;
}

inline std::string ReadCorpus(const std::string& rel) {
  std::ifstream in(CorpusPath(rel));
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline SymbolTable FrameworkSymbols() {
  return LoadProgram(ParseProgram(ReadCorpus("programs/framework.prog"), "framework.prog"));
}

inline RegionConfig SmallRegion(uint32_t segments = 4) {
  RegionConfig c;
  c.segment_count = segments;
  c.segment_size = 64 * 1024;
  c.map_capacity = 64;
  c.ledger_capacity = 256;
  c.coderef_capacity = 128;
  return c;
}

// Simulated world: one anonymous region, a logical clock, a set of live pids.
struct World {
  explicit World(const RegionConfig& config = SmallRegion())
      : region(SharedRegion::CreateAnonymous(config)),
        liveness{[this](uint64_t pid) { return alive.count(pid) > 0; }, 0} {}

  std::unique_ptr<Process> Spawn(uint64_t pid, const SymbolTable& symbols,
                                 const ProcessOptions& options, EventLog* events = nullptr) {
    alive.insert(pid);
    return std::make_unique<Process>(pid, symbols, region.get(), &clock, liveness, options,
                                     events);
  }

  std::unique_ptr<SharedRegion> region;
  ManualBeaconClock clock;
  std::set<uint64_t> alive;
  LivenessPolicy liveness;
};

inline ProcessOptions SmallThresholds(uint64_t warm, uint64_t st, uint64_t ht) {
  ProcessOptions o;
  o.thresholds = {warm, st, ht, ht * 100};
  return o;
}

}  // namespace codeshare::testing

#endif  // CODESHARE_TESTS_UNIT_HELPERS_H_
