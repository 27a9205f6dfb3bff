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

#ifndef NETMMU_TYPES_HPP_
#define NETMMU_TYPES_HPP_

#include <compare>
#include <cstdint>

namespace netmmu {

using VirtAddr = std::uint64_t;
using Pdid = std::uint32_t;  // process-group id owning a protection domain

// Memory and compute blades live in disjoint id spaces; distinct wrapper types
// make mixing them a compile error rather than an off-by-one rack position.
struct MemBladeId {
  std::uint32_t index = 0;
  auto operator<=>(const MemBladeId&) const = default;
};

struct ComputeBladeId {
  std::uint32_t index = 0;
  auto operator<=>(const ComputeBladeId&) const = default;
};

enum class AccessType : std::uint8_t { kRead, kWrite };

// Permission class attached to a protection entry. Write implies read (there
// is no write-only class), enforced by the factory functions.
struct PermissionClass {
  bool readable = false;
  bool writable = false;

  static constexpr PermissionClass ro() { return {true, false}; }
  static constexpr PermissionClass rw() { return {true, true}; }
  static constexpr PermissionClass none() { return {false, false}; }

  constexpr bool admits(AccessType t) const {
    return t == AccessType::kRead ? readable : writable;
  }
  // True when this class grants everything `other` grants.
  constexpr bool covers(const PermissionClass& other) const {
    return (!other.readable || readable) && (!other.writable || writable);
  }
  auto operator<=>(const PermissionClass&) const = default;
};

// Last-writer tag carried by every page copy. writer 0 means "initial zero
// page"; compute blade b is recorded as b+1. seq is the trace sequence number
// of the write, so a tag pins both author and program point.
struct ValueTag {
  std::uint32_t writer = 0;
  std::uint64_t seq = 0;
  auto operator<=>(const ValueTag&) const = default;
};

inline constexpr std::uint32_t tag_writer(ComputeBladeId b) { return b.index + 1; }

}  // namespace netmmu

#endif  // NETMMU_TYPES_HPP_
