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

#ifndef NETMMU_ADDRSPACE_HPP_
#define NETMMU_ADDRSPACE_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "netmmu/switchres.hpp"
#include "netmmu/types.hpp"

namespace netmmu {

// A live allocation in the global virtual space.
struct VmaRange {
  VirtAddr base = 0;
  std::uint64_t length = 0;  // power-of-two multiple of page size
  Pdid pdid = 0;
  VirtAddr end() const { return base + length; }
  bool contains(VirtAddr a) const { return a >= base && a < end(); }
};

struct PhysLoc {
  MemBladeId blade;
  std::uint64_t offset = 0;  // byte offset within the blade
};

struct BladeLoad {
  MemBladeId blade;
  std::uint64_t capacity = 0;
  std::uint64_t allocated = 0;
};

// Global virtual address space over the registered memory blades.
//
// Each blade's capacity is appended as one contiguous window, covered by a
// single primary translation entry mapping the window one-to-one onto the
// blade (one match-action rule per blade). Allocation is balanced first-fit:
// the least-loaded blade is tried first, holes are kept sorted by address and
// coalesced eagerly on free. Outlier entries override the primary mapping for
// a power-of-two subrange; translation resolves to the smallest entry
// containing the address (longest-prefix-match order).
class AddressSpace {
 public:
  AddressSpace(std::uint64_t page_size, SwitchBudget* budget);

  // Appends a blade window to the space. Capacity must be a positive multiple
  // of the page size. Consumes one translation rule.
  MemBladeId register_memory_blade(std::uint64_t capacity);

  // Allocates a vma for pdid. The size is rounded up to a power-of-two
  // multiple of the page size and the base is aligned to the rounded length,
  // so every allocation is coverable by a single protection prefix entry.
  // Throws kOutOfMemory when no blade has a fitting aligned hole.
  VmaRange alloc_vma(Pdid pdid, std::uint64_t size);

  // Releases a previously allocated vma; the hole is merged with adjacent
  // free space immediately. Throws kInvalidFree for anything else.
  void free_vma(const VmaRange& vma);

  // Maps a virtual address to (blade, offset) through the most specific
  // entry. nullopt when the address is outside every registered window.
  std::optional<PhysLoc> try_translate(VirtAddr va) const;
  PhysLoc translate(VirtAddr va) const;  // throws kTranslationFault

  // Installs an outlier mapping vrange -> (blade, pbase). The range must be a
  // power-of-two, aligned, inside a registered window, and the destination
  // must be free on the target blade; the destination is reserved so later
  // allocations cannot collide with it. Consumes one outlier rule.
  void add_outlier(VirtAddr vbase, std::uint64_t vlen, MemBladeId blade, std::uint64_t pbase);

  // Jain fairness index over per-blade allocated bytes; 1.0 for an all-zero
  // load vector (an empty rack is perfectly fair by convention).
  double fairness_index() const;

  std::uint64_t page_size() const { return page_size_; }
  std::uint64_t total_registered() const { return next_window_base_; }
  std::vector<BladeLoad> blade_loads() const;
  const std::map<VirtAddr, VmaRange>& live_vmas() const { return vmas_; }
  std::optional<VmaRange> find_vma(VirtAddr base) const;
  std::uint64_t translation_entry_count() const { return blades_.size(); }
  std::uint64_t outlier_entry_count() const { return outliers_.size(); }

  // Indices of the fixed-size top-level blocks (block_size bytes, aligned)
  // that overlap at least one live vma. Drives the split controller's N.
  std::set<std::uint64_t> allocated_block_set(std::uint64_t block_size) const;

 private:
  struct Blade {
    VirtAddr window_base = 0;
    std::uint64_t capacity = 0;
    std::uint64_t allocated = 0;
    std::map<VirtAddr, std::uint64_t> holes;  // base -> length, address order
  };

  std::optional<VirtAddr> fit_hole(const Blade& blade, std::uint64_t len) const;
  void carve(Blade& blade, VirtAddr base, std::uint64_t len);
  void uncarve(Blade& blade, VirtAddr base, std::uint64_t len);

  std::uint64_t page_size_;
  SwitchBudget* budget_;
  VirtAddr next_window_base_ = 0;
  std::vector<Blade> blades_;
  std::map<VirtAddr, VmaRange> vmas_;  // live allocations by base
  struct Outlier {
    VirtAddr vbase;
    std::uint64_t vlen;
    MemBladeId blade;
    std::uint64_t pbase;
  };
  std::map<VirtAddr, Outlier> outliers_;
  std::uint64_t max_outlier_len_ = 0;
};

}  // namespace netmmu

#endif  // NETMMU_ADDRSPACE_HPP_
