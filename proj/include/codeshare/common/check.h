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

#ifndef CODESHARE_COMMON_CHECK_H_
#define CODESHARE_COMMON_CHECK_H_

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace codeshare {

// Thrown when an internal invariant is broken. These are artifact bugs, not
// user errors, but they are exceptions so the test suites can observe them.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A non-owner process tried to mutate a cache segment.
class AccessViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[noreturn]] void FailCheck(const char* file, int line, const char* expr, const std::string& msg);

}  // namespace codeshare

#define CS_CHECK(cond, msg)                                              \
  do {                                                                   \
    if (!(cond)) {                                                       \
      std::ostringstream cs_check_os_;                                   \
      cs_check_os_ << msg;                                               \
      ::codeshare::FailCheck(__FILE__, __LINE__, #cond, cs_check_os_.str()); \
    }                                                                    \
  } while (false)

#endif  // CODESHARE_COMMON_CHECK_H_
