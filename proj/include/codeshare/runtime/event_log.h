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

#ifndef CODESHARE_RUNTIME_EVENT_LOG_H_
#define CODESHARE_RUNTIME_EVENT_LOG_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "codeshare/cache/code_handle.h"
#include "codeshare/hash/hash_id.h"

namespace codeshare {

struct ExecTotals {
  uint64_t hotness = 0;
  uint64_t interp_ns = 0;
  uint64_t interp_calls = 0;
  uint64_t compiled_ns = 0;
  uint64_t compiled_calls = 0;
};

// Raw per-process event stream, one JSON object per line. Times are integer
// nanoseconds exactly as measured, so every derived figure can be recomputed
// from the log alone.
class EventLog {
 public:
  void Share(uint64_t pid, std::string_view method, const HashId& hash, uint64_t hash_ns,
             uint64_t lookup_ns, bool hit, uint64_t hotness, uint64_t adopted_compile_ns);
  void Compile(uint64_t pid, std::string_view method, const HashId& hash, uint64_t compile_ns,
               uint64_t bytes, const CodeHandle& handle, bool published);
  void Discard(uint64_t pid, std::string_view method, uint64_t bytes);
  void Deopt(uint64_t pid, std::string_view method, uint64_t hotness_before);
  void ValidityFailure(uint64_t pid, std::string_view method, const CodeHandle& handle);
  void Gc(uint64_t pid, std::string_view mode, uint64_t bytes_freed, uint64_t kept,
          uint64_t released);
  void Exec(uint64_t pid, std::string_view method, const HashId& hash, const ExecTotals& t);
  void Raw(std::string line) { lines_.push_back(std::move(line)); }

  const std::vector<std::string>& lines() const { return lines_; }
  void Append(const EventLog& other);
  std::string Text() const;

 private:
  std::vector<std::string> lines_;
};

}  // namespace codeshare

#endif  // CODESHARE_RUNTIME_EVENT_LOG_H_
