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

#include "codeshare/runtime/thresholds.h"

#include <string>

namespace codeshare {

void Thresholds::Validate() const {
  if (warm == 0) throw ConfigError("warm threshold must be positive");
  if (sharing == 0) throw ConfigError("sharing threshold must be positive");
  if (!(sharing < hot)) {
    throw ConfigError("sharing threshold " + std::to_string(sharing) +
                      " must be below the hot threshold " + std::to_string(hot));
  }
  if (!(hot < osr)) {
    throw ConfigError("hot threshold " + std::to_string(hot) + " must be below the osr threshold " +
                      std::to_string(osr));
  }
}

}  // namespace codeshare
