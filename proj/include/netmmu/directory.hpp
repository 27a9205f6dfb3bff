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

#ifndef NETMMU_DIRECTORY_HPP_
#define NETMMU_DIRECTORY_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "netmmu/error.hpp"
#include "netmmu/switchres.hpp"
#include "netmmu/types.hpp"
#include "netmmu/util.hpp"

namespace netmmu {

enum class MsiState : std::uint8_t { kInvalid, kShared, kModified };

inline const char* msi_name(MsiState s) {
  switch (s) {
    case MsiState::kInvalid: return "I";
    case MsiState::kShared: return "S";
    case MsiState::kModified: return "M";
  }
  return "?";
}

// Directory entry for one coherence region: an aligned power-of-two block of
// the virtual space, between one page and one top-level block in size.
// Sharers are a compute-blade bitmask; residency of individual pages at a
// blade is deliberately NOT tracked here (sharer lists only ever grow until
// an invalidation), which is what makes false invalidations possible and
// worth measuring.
struct DirectoryEntry {
  VirtAddr base = 0;
  std::uint64_t size = 0;
  MsiState state = MsiState::kInvalid;
  std::uint32_t sharers = 0;              // bit b set: compute blade b
  std::int32_t owner = -1;                // valid only in state M
  std::uint32_t slot = 0;                 // directory slot index
  std::uint64_t false_invals_epoch = 0;   // per-region count, reset each epoch
  std::uint64_t last_touch_seq = 0;

  VirtAddr end() const { return base + size; }
  bool contains(VirtAddr a) const { return a >= base && a < end(); }
  bool has_sharer(ComputeBladeId b) const { return (sharers >> b.index) & 1u; }
  void add_sharer(ComputeBladeId b) { sharers |= (1u << b.index); }
};

// Directory slot allocator: a free list of slot indices plus a used map keyed
// by region base, mirrored into the switch budget so per-epoch accounting can
// be cross-checked against it.
class SlotPool {
 public:
  SlotPool(std::uint32_t capacity, SwitchBudget* budget);

  std::optional<std::uint32_t> take(VirtAddr base);
  void release(VirtAddr base);
  void move_key(VirtAddr from, VirtAddr to);

  std::uint32_t capacity() const { return capacity_; }
  std::uint64_t used() const { return used_.size(); }
  double utilization() const {
    return capacity_ == 0 ? 0.0 : static_cast<double>(used()) / capacity_;
  }

 private:
  std::uint32_t capacity_;
  SwitchBudget* budget_;
  std::vector<std::uint32_t> free_;        // LIFO free list
  std::map<VirtAddr, std::uint32_t> used_; // region base -> slot
};

// Ordered set of live regions. Maintains the partition discipline: regions
// are aligned power-of-two blocks that never overlap, nested inside fixed
// top-level blocks of top_size bytes. Instantiation is lazy: the first touch
// of an uncovered area materializes the largest uncovered aligned block
// containing the page, capped at initial_size.
class RegionMap {
 public:
  RegionMap(std::uint64_t page_size, std::uint64_t initial_size, std::uint64_t top_size,
            std::uint32_t slot_capacity, SwitchBudget* budget);

  DirectoryEntry* find_covering(VirtAddr va);
  const DirectoryEntry* find_covering(VirtAddr va) const;

  // Creates the region covering va (state I). Returns nullptr when no
  // directory slot is free; the caller owns the capacity policy.
  DirectoryEntry* instantiate(VirtAddr va);

  // Splits a region at its midpoint; both children inherit state, sharers and
  // owner. The left child keeps the parent's slot, the right child takes a
  // fresh one. Returns false (map unchanged) when no slot is free.
  bool split(DirectoryEntry* e);

  // Merges the buddy pair starting at left->base (left and its equal-size
  // right buddy). States/sharers/owner must already be identical.
  DirectoryEntry* merge(DirectoryEntry* left, DirectoryEntry* right);

  void remove(DirectoryEntry* e);

  std::map<VirtAddr, DirectoryEntry>& regions() { return regions_; }
  const std::map<VirtAddr, DirectoryEntry>& regions() const { return regions_; }
  std::uint64_t live_count() const { return regions_.size(); }
  const SlotPool& slots() const { return pool_; }
  std::uint64_t page_size() const { return page_size_; }
  std::uint64_t top_size() const { return top_size_; }
  std::uint64_t initial_size() const { return initial_size_; }
  std::uint64_t block_of(VirtAddr va) const { return va / top_size_; }

  // Invariant sweep used by tests: alignment, nesting, non-overlap.
  void check_partition() const;

 private:
  bool covered(VirtAddr lo, VirtAddr hi) const;  // any region intersects [lo,hi)

  std::uint64_t page_size_;
  std::uint64_t initial_size_;
  std::uint64_t top_size_;
  std::map<VirtAddr, DirectoryEntry> regions_;
  SlotPool pool_;
};

}  // namespace netmmu

#endif  // NETMMU_DIRECTORY_HPP_
