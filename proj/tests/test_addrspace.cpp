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

#include <doctest.h>

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "netmmu/addrspace.hpp"
#include "netmmu/error.hpp"
#include "netmmu/util.hpp"

using namespace netmmu;

namespace {

constexpr std::uint64_t kPage = 4096;

// Brute-force placement model. Policy under test: blades are tried least
// allocated bytes first (ties by lowest id), and within a blade the winner is
// the lowest len-aligned position whose pages are all free. Mirrors the
// documented behaviour without sharing any code with AddressSpace.
class FlatAllocator {
 public:
  void add_blade(std::uint64_t base, std::uint64_t capacity) {
    blades_.push_back({base, 0, std::vector<bool>(capacity / kPage, false)});
  }

  std::optional<std::uint64_t> alloc(std::uint64_t size) {
    std::uint64_t len = ceil_pow2(std::max(size, kPage));
    std::uint64_t pages = len / kPage;
    std::vector<std::size_t> order(blades_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return blades_[a].allocated < blades_[b].allocated;
    });
    for (std::size_t bi : order) {
      Blade& b = blades_[bi];
      for (std::uint64_t p = 0; p + pages <= b.used.size(); p += pages) {
        bool free = true;
        for (std::uint64_t i = 0; i < pages && free; ++i) free = !b.used[p + i];
        if (!free) continue;
        for (std::uint64_t i = 0; i < pages; ++i) b.used[p + i] = true;
        b.allocated += len;
        return b.base + p * kPage;
      }
    }
    return std::nullopt;
  }

  void free(std::uint64_t base, std::uint64_t length) {
    for (auto& b : blades_) {
      if (base < b.base || base >= b.base + b.used.size() * kPage) continue;
      std::uint64_t p = (base - b.base) / kPage;
      for (std::uint64_t i = 0; i < length / kPage; ++i) b.used[p + i] = false;
      b.allocated -= length;
      return;
    }
    FAIL("free outside any blade");
  }

 private:
  struct Blade {
    std::uint64_t base;
    std::uint64_t allocated;
    std::vector<bool> used;
  };
  std::vector<Blade> blades_;
};

}  // namespace

TEST_CASE("blade windows are consecutive and translation splits at the boundary") {
  AddressSpace as(kPage, nullptr);
  MemBladeId b0 = as.register_memory_blade(1 << 20);
  MemBladeId b1 = as.register_memory_blade(1 << 20);
  CHECK(b0.index == 0);
  CHECK(b1.index == 1);
  CHECK(as.total_registered() == (2u << 20));

  PhysLoc last = as.translate((1 << 20) - 1);
  CHECK(last.blade == b0);
  CHECK(last.offset == (1 << 20) - 1);
  PhysLoc first = as.translate(1 << 20);
  CHECK(first.blade == b1);
  CHECK(first.offset == 0);
  CHECK_FALSE(as.try_translate(2 << 20).has_value());
  CHECK_THROWS_AS(as.translate(2 << 20), SimError);
}

TEST_CASE("allocations are rounded to an aligned power of two") {
  AddressSpace as(kPage, nullptr);
  as.register_memory_blade(1 << 20);

  VmaRange a = as.alloc_vma(1, 3 * kPage);  // rounds to 4 pages
  CHECK(a.length == 4 * kPage);
  CHECK(a.base % a.length == 0);

  VmaRange b = as.alloc_vma(1, kPage);
  CHECK(b.length == kPage);
  // First fit: the hole left between a (4 pages at 0) and the next aligned
  // 4-page boundary is... none; b lands right after a.
  CHECK(b.base == a.end());

  VmaRange c = as.alloc_vma(1, 4 * kPage);
  CHECK(c.base % (4 * kPage) == 0);
  CHECK(c.base >= b.end());

  as.free_vma(b);
  VmaRange d = as.alloc_vma(2, kPage);
  CHECK(d.base == b.base);  // freed hole is reused

  CHECK_THROWS_AS(as.free_vma(b), SimError);  // double free
  CHECK_THROWS_AS(as.alloc_vma(1, 0), SimError);
  CHECK_THROWS_AS(as.alloc_vma(1, 2 << 20), SimError);  // larger than the rack
}

TEST_CASE("placement matches a brute-force bitmap model over a random schedule") {
  SwitchBudget budget(1024, 1024);
  AddressSpace as(kPage, &budget);
  FlatAllocator ref;
  as.register_memory_blade(64 * kPage);
  ref.add_blade(0, 64 * kPage);
  as.register_memory_blade(32 * kPage);
  ref.add_blade(64 * kPage, 32 * kPage);

  DetRng rng(7);
  std::vector<VmaRange> live;
  for (int step = 0; step < 400; ++step) {
    bool do_alloc = live.empty() || rng.chance(0.6);
    if (do_alloc) {
      std::uint64_t size = (rng.below(8) + 1) * kPage;
      std::optional<std::uint64_t> want = ref.alloc(size);
      if (!want) {
        CHECK_THROWS_AS(as.alloc_vma(1, size), SimError);
        continue;
      }
      VmaRange got = as.alloc_vma(1, size);
      CHECK(got.base == *want);
      live.push_back(got);
    } else {
      std::size_t pick = rng.below(live.size());
      VmaRange v = live[pick];
      as.free_vma(v);
      ref.free(v.base, v.length);
      live.erase(live.begin() + pick);
    }
  }
}

TEST_CASE("fairness index over blade loads") {
  AddressSpace as(kPage, nullptr);
  as.register_memory_blade(16 * kPage);
  as.register_memory_blade(16 * kPage);

  CHECK(as.fairness_index() == doctest::Approx(1.0));  // empty rack convention

  // All load on blade 0: loads {8 pages, 0} -> (8)^2 / (2 * 64) = 0.5.
  as.alloc_vma(1, 8 * kPage);
  CHECK(as.fairness_index() == doctest::Approx(0.5));
}

TEST_CASE("outlier mappings take precedence and consume a rule") {
  SwitchBudget budget(16, 3);  // translation rules for 2 blades + 1 outlier
  AddressSpace as(kPage, &budget);
  MemBladeId b0 = as.register_memory_blade(16 * kPage);
  MemBladeId b1 = as.register_memory_blade(16 * kPage);
  CHECK(budget.rules_used(RuleCategory::kTranslation) == 2);

  // Redirect one page of blade 0's window to blade 1.
  as.add_outlier(4 * kPage, kPage, b1, 8 * kPage);
  CHECK(budget.rules_used(RuleCategory::kOutlier) == 1);

  PhysLoc hit = as.translate(4 * kPage + 123);
  CHECK(hit.blade == b1);
  CHECK(hit.offset == 8 * kPage + 123);
  // Neighbouring addresses still use the window rule.
  CHECK(as.translate(5 * kPage).blade == b0);

  // Budget exhausted: a second outlier must fail and change nothing.
  CHECK_THROWS_AS(as.add_outlier(6 * kPage, kPage, b1, 9 * kPage), SimError);
  CHECK(as.outlier_entry_count() == 1);

  // The reserved destination (VA 24*kPage: blade 1 window base 16*kPage plus
  // pbase 8*kPage) cannot be handed out: blade 0 holds 16 pages, blade 1 only
  // 15 of 16, and no allocation may land on the reserved one.
  const VirtAddr reserved = 24 * kPage;
  for (int i = 0; i < 31; ++i) {
    VmaRange v = as.alloc_vma(1, kPage);
    CHECK(v.base != reserved);
  }
  CHECK_THROWS_AS(as.alloc_vma(1, kPage), SimError);  // rack genuinely full
}

TEST_CASE("allocated_block_set reports touched top-level blocks") {
  AddressSpace as(kPage, nullptr);
  as.register_memory_blade(64 * kPage);
  const std::uint64_t block = 16 * kPage;

  CHECK(as.allocated_block_set(block).empty());
  VmaRange a = as.alloc_vma(1, kPage);            // block 0
  VmaRange b = as.alloc_vma(1, 16 * kPage);       // whole block 1
  CHECK(as.allocated_block_set(block) == std::set<std::uint64_t>{0, 1});
  as.free_vma(a);
  CHECK(as.allocated_block_set(block) == std::set<std::uint64_t>{1});
  as.free_vma(b);
  CHECK(as.allocated_block_set(block).empty());
}
