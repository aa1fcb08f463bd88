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

#ifndef CODESHARE_HASH_HASH_ID_H_
#define CODESHARE_HASH_HASH_ID_H_

#include <array>
#include <compare>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "codeshare/vm/bytecode.h"

namespace codeshare {

// 128-bit method identity used as the sharing-map key.
struct HashId {
  std::array<uint8_t, 16> digest{};

  bool IsZero() const {
    for (uint8_t b : digest) {
      if (b != 0) return false;
    }
    return true;
  }

  // Low 64 bits, little-endian; used for table probing.
  uint64_t Low64() const {
    uint64_t v;
    std::memcpy(&v, digest.data(), sizeof(v));
    return v;
  }

  std::string ToHex() const;
  static bool FromHex(const std::string& hex, HashId* out);

  friend auto operator<=>(const HashId&, const HashId&) = default;
};

struct HashIdHasher {
  size_t operator()(const HashId& id) const { return static_cast<size_t>(id.Low64()); }
};

// Canonical preimage of a method: UTF-8 signature, one 0x00 byte, then each
// instruction as its opcode byte followed by a fixed, per-opcode number of
// little-endian u16 fields. 64-bit immediates are written as four u16 limbs.
std::vector<uint8_t> CanonicalBytes(const MethodDef& def);

// BLAKE2b with a 16-byte output over CanonicalBytes(def). Unkeyed, so the
// value is the same in every process, on every run.
HashId HashIdentify(const MethodDef& def);

}  // namespace codeshare

#endif  // CODESHARE_HASH_HASH_ID_H_
