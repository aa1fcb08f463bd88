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

#ifndef CODESHARE_RUNTIME_THRESHOLDS_H_
#define CODESHARE_RUNTIME_THRESHOLDS_H_

#include <cstdint>
#include <stdexcept>

namespace codeshare {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Hotness thresholds. Crossing `warm` starts profiling, `sharing` issues the
// lookup in the global map, `hot` compiles, and `osr` is only counted.
struct Thresholds {
  uint64_t warm = 5000;
  uint64_t sharing = 5000;
  uint64_t hot = 10000;
  uint64_t osr = 20000;

  // Throws ConfigError unless 0 < warm, 0 < sharing < hot < osr.
  void Validate() const;

  // True when a counter moving from `before` to `after` reaches `t`.
  static bool Crossed(uint64_t before, uint64_t after, uint64_t t) {
    return before < t && t <= after;
  }
};

}  // namespace codeshare

#endif  // CODESHARE_RUNTIME_THRESHOLDS_H_
