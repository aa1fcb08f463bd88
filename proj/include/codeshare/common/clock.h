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

#ifndef CODESHARE_COMMON_CLOCK_H_
#define CODESHARE_COMMON_CLOCK_H_

#include <chrono>
#include <cstdint>

namespace codeshare {

inline uint64_t NowNs() {
  return static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(
                                   std::chrono::steady_clock::now().time_since_epoch())
                                   .count());
}

// Source of liveness-beacon timestamps. Real workers use the monotonic clock;
// the simulation drives a logical tick so runs are reproducible.
class BeaconClock {
 public:
  virtual ~BeaconClock() = default;
  virtual uint64_t Now() = 0;
};

class SteadyBeaconClock final : public BeaconClock {
 public:
  uint64_t Now() override { return NowNs(); }
};

class ManualBeaconClock final : public BeaconClock {
 public:
  uint64_t Now() override { return now_; }
  void Advance(uint64_t ticks = 1) { now_ += ticks; }

 private:
  uint64_t now_ = 1;
};

}  // namespace codeshare

#endif  // CODESHARE_COMMON_CLOCK_H_
