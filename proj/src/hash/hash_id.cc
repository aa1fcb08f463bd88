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

#include "codeshare/hash/hash_id.h"

#include <sodium.h>

#include "codeshare/common/check.h"

namespace codeshare {

namespace {

void PutU16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

void PutImmediate(std::vector<uint8_t>& out, int64_t value) {
  uint64_t bits = static_cast<uint64_t>(value);
  for (int limb = 0; limb < 4; ++limb) {
    PutU16(out, static_cast<uint16_t>(bits >> (16 * limb)));
  }
}

}  // namespace

std::string HashId::ToHex() const {
  static const char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(32);
  for (uint8_t b : digest) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 0xf]);
  }
  return s;
}

bool HashId::FromHex(const std::string& hex, HashId* out) {
  if (hex.size() != 32) return false;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  for (size_t i = 0; i < 16; ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) return false;
    out->digest[i] = static_cast<uint8_t>(hi << 4 | lo);
  }
  return true;
}

std::vector<uint8_t> CanonicalBytes(const MethodDef& def) {
  std::vector<uint8_t> out;
  out.reserve(def.signature.size() + 1 + def.code.size() * 9);
  out.insert(out.end(), def.signature.begin(), def.signature.end());
  out.push_back(0x00);
  for (const Instruction& insn : def.code) {
    out.push_back(static_cast<uint8_t>(insn.op));
    switch (insn.op) {
      case Opcode::kLoadConst:
        PutU16(out, insn.dst);
        PutImmediate(out, insn.imm);
        break;
      case Opcode::kMove:
        PutU16(out, insn.dst);
        PutU16(out, insn.lhs);
        break;
      case Opcode::kAdd:
      case Opcode::kSub:
      case Opcode::kMul:
      case Opcode::kCmpLt:
        PutU16(out, insn.dst);
        PutU16(out, insn.lhs);
        PutU16(out, insn.rhs);
        break;
      case Opcode::kJump:
        PutU16(out, insn.target);
        break;
      case Opcode::kJumpIfZero:
        PutU16(out, insn.dst);
        PutU16(out, insn.target);
        break;
      case Opcode::kInvokeSym:
        PutU16(out, insn.symbol);
        PutU16(out, insn.dst);
        PutU16(out, insn.argc);
        for (size_t k = 0; k < kMaxInvokeArgs; ++k) {
          PutU16(out, k < insn.argc ? insn.args[k] : 0);
        }
        break;
      case Opcode::kReturn:
        PutU16(out, insn.dst);
        break;
    }
  }
  return out;
}

HashId HashIdentify(const MethodDef& def) {
  static const bool initialized = sodium_init() >= 0;
  CS_CHECK(initialized, "libsodium failed to initialize");
  std::vector<uint8_t> bytes = CanonicalBytes(def);
  HashId id;
  int rc = crypto_generichash(id.digest.data(), id.digest.size(), bytes.data(), bytes.size(),
                              nullptr, 0);
  CS_CHECK(rc == 0, "crypto_generichash failed");
  return id;
}

}  // namespace codeshare
