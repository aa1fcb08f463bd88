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

#include "codeshare/jit/compiled_code.h"

#include <cstring>
#include <sstream>

namespace codeshare {

const char* FastKindName(FastKind kind) {
  switch (kind) {
    case FastKind::kConst: return "const";
    case FastKind::kMove: return "move";
    case FastKind::kAdd: return "add";
    case FastKind::kSub: return "sub";
    case FastKind::kMul: return "mul";
    case FastKind::kLt: return "lt";
    case FastKind::kJump: return "jump";
    case FastKind::kJz: return "jz";
    case FastKind::kInvoke: return "invoke";
    case FastKind::kInvokeDirect: return "invoke.direct";
    case FastKind::kGuard: return "guard";
    case FastKind::kClear: return "clear";
    case FastKind::kRet: return "ret";
  }
  return "?";
}

std::optional<CompiledView> CompiledView::Open(const std::byte* bytes, size_t available,
                                               const HashId* expected, std::string* error) {
  auto fail = [&](const char* what) -> std::optional<CompiledView> {
    if (error != nullptr) *error = what;
    return std::nullopt;
  };
  if (bytes == nullptr || available < sizeof(CompiledHeader)) return fail("truncated header");
  const auto* h = reinterpret_cast<const CompiledHeader*>(bytes);
  if (h->magic != kCompiledMagic) return fail("bad magic");
  if (h->version != kCompiledVersion) return fail("unsupported version");
  if (h->total_length > available) return fail("length exceeds block");
  uint64_t ops_end = uint64_t{h->ops_offset} + uint64_t{h->op_count} * sizeof(FastOp);
  uint64_t inl_end = uint64_t{h->inlined_offset} + uint64_t{h->inlined_count} * sizeof(uint16_t);
  if (h->ops_offset < sizeof(CompiledHeader) || h->ops_offset % alignof(FastOp) != 0 ||
      ops_end > h->total_length || inl_end > h->total_length || h->op_count == 0) {
    return fail("inconsistent section offsets");
  }
  if (expected != nullptr &&
      std::memcmp(h->source_hash, expected->digest.data(), expected->digest.size()) != 0) {
    return fail("source hash mismatch");
  }
  CompiledView view;
  view.header_ = h;
  view.ops_ = {reinterpret_cast<const FastOp*>(bytes + h->ops_offset), h->op_count};
  view.inlined_ = {reinterpret_cast<const uint16_t*>(bytes + h->inlined_offset),
                   h->inlined_count};
  return view;
}

HashId CompiledView::source_hash() const {
  HashId id;
  std::memcpy(id.digest.data(), header_->source_hash, id.digest.size());
  return id;
}

std::string Disassemble(const CompiledView& view) {
  std::ostringstream os;
  const CompiledHeader& h = view.header();
  os << "; " << view.source_hash().ToHex() << " regs=" << h.num_registers
     << " ops=" << h.op_count << " guards=" << h.guard_count << " inlined=" << h.inlined_count
     << "\n";
  size_t i = 0;
  for (const FastOp& op : view.ops()) {
    os << i++ << "\t" << FastKindName(op.kind) << " a=" << op.a << " b=" << op.b
       << " c=" << op.c;
    if (op.kind == FastKind::kInvoke || op.kind == FastKind::kInvokeDirect) {
      os << " args=";
      for (size_t k = 0; k < op.argc; ++k) os << (k ? "," : "") << "r" << PackedArg(op, k);
    } else {
      os << " imm=" << op.imm;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace codeshare
