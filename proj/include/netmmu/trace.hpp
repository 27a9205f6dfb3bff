/*
 * Copyright 2026 The netmmu Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef NETMMU_TRACE_HPP_
#define NETMMU_TRACE_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "netmmu/types.hpp"

namespace netmmu {

enum class OpKind : std::uint8_t { kRead, kWrite, kAlloc, kFree, kSetPerm };

const char* op_name(OpKind op);

// One trace line: `seq,blade,pdid,op,arg1[,arg2]`.
//   R / W:    arg1 = address (absolute or $name+offset)
//   ALLOC:    arg1 = size, arg2 = symbolic name bound to the chosen base
//   FREE:     arg1 = address of the vma base
//   SETPERM:  arg1 = address[:length] (length omitted = whole vma), arg2 = ro|rw|none
// Addresses and sizes accept decimal, 0x hex, and K/M/G suffixes. Symbolic
// addresses stay unresolved until the run binds them at the ALLOC event.
struct TraceEvent {
  std::uint64_t seq = 0;
  std::uint32_t blade = 0;
  Pdid pdid = 0;
  OpKind op = OpKind::kRead;

  VirtAddr addr = 0;        // absolute address, valid when symbol is empty
  std::string symbol;       // referenced allocation name, without the '$'
  std::uint64_t offset = 0; // added to the symbol's bound base

  std::uint64_t size = 0;   // ALLOC size; SETPERM extent (0 = whole vma)
  bool none_perm = false;   // SETPERM none (pc below is ignored then)
  PermissionClass pc;       // SETPERM class
  std::string name;         // ALLOC binding, may be empty
};

// Parses a size/address token: decimal, 0x-prefixed hex, or a decimal with a
// K/M/G binary suffix. Throws kTrace on anything else.
std::uint64_t parse_size(const std::string& token);

// Throws SimError(kTrace) carrying the 1-based line number on any malformed
// line; seq values must be strictly increasing.
std::vector<TraceEvent> parse_trace(std::istream& in);

// Inverse of parse_trace up to whitespace: emitted text re-parses to an equal
// event list. Used by --emit-trace and the generator/replay equivalence test.
std::string format_trace(const std::vector<TraceEvent>& events);

}  // namespace netmmu

#endif  // NETMMU_TRACE_HPP_
