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

#ifndef NETMMU_PROTECTION_HPP_
#define NETMMU_PROTECTION_HPP_

#include <cstdint>
#include <map>
#include <vector>

#include "netmmu/addrspace.hpp"
#include "netmmu/switchres.hpp"
#include "netmmu/types.hpp"

namespace netmmu {

// One TCAM prefix rule: an aligned power-of-two range owned by a pdid.
struct ProtEntry {
  Pdid pdid = 0;
  VirtAddr vbase = 0;
  std::uint64_t vlen = 0;  // power of two, >= page size, vbase % vlen == 0
  PermissionClass pc;
  VirtAddr end() const { return vbase + vlen; }
};

enum class DenyReason : std::uint8_t { kNoEntry, kPermissionMismatch };

struct CheckResult {
  bool allowed = false;
  DenyReason reason = DenyReason::kNoEntry;
};

// Per-<pdid, range> permission rules encoded as aligned power-of-two prefix
// entries. A range decomposes greedily, largest aligned block first, which
// meets the popcount(pages) entry bound for allocator-aligned ranges; adjacent
// buddy entries with equal permissions re-coalesce eagerly. Overlapping writes
// are last-write-wins: existing entries are split around the new range before
// it is installed. Every live entry holds one protection rule from the switch
// budget; updates are transactional against that budget (rejected updates
// leave the table unchanged).
class ProtectionTable {
 public:
  ProtectionTable(std::uint64_t page_size, SwitchBudget* budget)
      : page_size_(page_size), budget_(budget) {}

  // Applies pc over the vma (rounded out to page granularity) and returns the
  // number of live entries intersecting it afterwards. The vma base must
  // carry allocator alignment: aligned to the largest power of two <= length.
  std::uint64_t set_permission(Pdid pdid, const VmaRange& vma, PermissionClass pc);

  // Removes all permissions over the vma, splitting any straddling entries
  // first. Returns the number of entries freed (can be negative in principle
  // only if splitting added more than it removed, which the power-of-two
  // geometry rules out; hence unsigned).
  std::uint64_t revoke(Pdid pdid, const VmaRange& vma);

  // revoke() across every pdid with entries in the range; used when the
  // backing vma is freed so cross-granted rights cannot outlive it.
  void revoke_all(const VmaRange& vma);

  CheckResult check(Pdid pdid, VirtAddr va, AccessType t) const;

  std::uint64_t entry_count() const { return total_entries_; }
  std::uint64_t entry_count(Pdid pdid) const;
  std::vector<ProtEntry> entries_for(Pdid pdid) const;
  std::vector<ProtEntry> entries_in(Pdid pdid, VirtAddr lo, VirtAddr hi) const;

 private:
  using PdidMap = std::map<VirtAddr, ProtEntry>;  // vbase -> entry, non-overlapping

  // Greedy aligned decomposition of [lo, hi) into power-of-two blocks.
  std::vector<std::pair<VirtAddr, std::uint64_t>> decompose(VirtAddr lo, VirtAddr hi) const;
  static void coalesce(PdidMap& m);
  // Removes [lo, hi) from `m`, splitting straddling entries into aligned rest
  // pieces that keep their permission class.
  void erase_range(PdidMap& m, Pdid pdid, VirtAddr lo, VirtAddr hi) const;
  void commit(Pdid pdid, PdidMap&& next);

  std::uint64_t page_size_;
  SwitchBudget* budget_;
  std::map<Pdid, PdidMap> tables_;
  std::uint64_t total_entries_ = 0;
};

}  // namespace netmmu

#endif  // NETMMU_PROTECTION_HPP_
