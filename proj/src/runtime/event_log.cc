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

#include "codeshare/runtime/event_log.h"

#include <json.hpp>

namespace codeshare {

namespace {

using nlohmann::json;

json HandleJson(const CodeHandle& h) {
  return json{{"segment", h.is_private() ? -1 : static_cast<int64_t>(h.segment)},
              {"offset", h.offset},
              {"generation", h.generation}};
}

}  // namespace

void EventLog::Share(uint64_t pid, std::string_view method, const HashId& hash, uint64_t hash_ns,
                     uint64_t lookup_ns, bool hit, uint64_t hotness,
                     uint64_t adopted_compile_ns) {
  lines_.push_back(json{{"ev", "share"},
                        {"pid", pid},
                        {"method", method},
                        {"hash", hash.ToHex()},
                        {"H_ns", hash_ns},
                        {"L_ns", lookup_ns},
                        {"hit", hit},
                        {"hotness", hotness},
                        {"J_ns", adopted_compile_ns}}
                       .dump());
}

void EventLog::Compile(uint64_t pid, std::string_view method, const HashId& hash,
                       uint64_t compile_ns, uint64_t bytes, const CodeHandle& handle,
                       bool published) {
  lines_.push_back(json{{"ev", "compile"},
                        {"pid", pid},
                        {"method", method},
                        {"hash", hash.ToHex()},
                        {"J_ns", compile_ns},
                        {"bytes", bytes},
                        {"handle", HandleJson(handle)},
                        {"published", published}}
                       .dump());
}

void EventLog::Discard(uint64_t pid, std::string_view method, uint64_t bytes) {
  lines_.push_back(
      json{{"ev", "discard"}, {"pid", pid}, {"method", method}, {"bytes", bytes}}.dump());
}

void EventLog::Deopt(uint64_t pid, std::string_view method, uint64_t hotness_before) {
  lines_.push_back(
      json{{"ev", "deopt"}, {"pid", pid}, {"method", method}, {"hotness", hotness_before}}
          .dump());
}

void EventLog::ValidityFailure(uint64_t pid, std::string_view method, const CodeHandle& handle) {
  lines_.push_back(json{{"ev", "invalid"},
                        {"pid", pid},
                        {"method", method},
                        {"handle", HandleJson(handle)}}
                       .dump());
}

void EventLog::Gc(uint64_t pid, std::string_view mode, uint64_t bytes_freed, uint64_t kept,
                  uint64_t released) {
  lines_.push_back(json{{"ev", "gc"},
                        {"pid", pid},
                        {"mode", mode},
                        {"bytes_freed", bytes_freed},
                        {"kept_refcount", kept},
                        {"sharee_released", released}}
                       .dump());
}

void EventLog::Exec(uint64_t pid, std::string_view method, const HashId& hash,
                    const ExecTotals& t) {
  lines_.push_back(json{{"ev", "exec"},
                        {"pid", pid},
                        {"method", method},
                        {"hash", hash.ToHex()},
                        {"HC", t.hotness},
                        {"interp_ns", t.interp_ns},
                        {"interp_calls", t.interp_calls},
                        {"compiled_ns", t.compiled_ns},
                        {"compiled_calls", t.compiled_calls}}
                       .dump());
}

void EventLog::Append(const EventLog& other) {
  lines_.insert(lines_.end(), other.lines_.begin(), other.lines_.end());
}

std::string EventLog::Text() const {
  std::string out;
  for (const std::string& line : lines_) {
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace codeshare
