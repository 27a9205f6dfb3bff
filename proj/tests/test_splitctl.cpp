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

#include <cmath>
#include <map>

#include "netmmu/addrspace.hpp"
#include "netmmu/directory.hpp"
#include "netmmu/splitctl.hpp"

using namespace netmmu;

namespace {

constexpr std::uint64_t kPage = 4096;
constexpr std::uint64_t kTop = 16 * kPage;  // 64 KiB top-level blocks

// A rack with `blocks` allocated top-level blocks, one vma per block.
struct Rig {
  SwitchBudget budget{256, 256};
  AddressSpace addr{kPage, &budget};
  RegionMap regions;

  Rig(std::uint64_t blocks, std::uint64_t initial, std::uint32_t slots)
      : regions(kPage, initial, kTop, slots, nullptr) {
    addr.register_memory_blade(16 * kTop);
    for (std::uint64_t i = 0; i < blocks; ++i) addr.alloc_vma(1, kTop);
  }
};

}  // namespace

TEST_CASE("threshold formula with frozen values") {
  // Three allocated blocks with 10, 20 and 30 false invalidations at c = 1:
  // t = 60 / (1 * 3) = 20.
  CHECK(compute_threshold(60, 1.0, 3) == doctest::Approx(20.0));
  CHECK(compute_threshold(60, 2.0, 3) == doctest::Approx(10.0));
  // No pain or no allocation: threshold disabled.
  CHECK(std::isinf(compute_threshold(0, 1.0, 3)));
  CHECK(std::isinf(compute_threshold(60, 1.0, 0)));
}

TEST_CASE("worst case subregions and the global bound") {
  // Below or at threshold: a single region suffices.
  CHECK(worst_case_subregions(10, 10.0, 256) == 1);
  CHECK(worst_case_subregions(0, 5.0, 256) == 1);
  // f = 100, t = 10, M = 256 pages: (ceil(100/10) - 1) * (1 + log2 256) = 9 * 9 = 81.
  CHECK(worst_case_subregions(100, 10.0, 256) == 81);
  // Non-power-of-two M rounds the depth up.
  CHECK(worst_case_subregions(100, 10.0, 300) == 9 * 10);
  // Disabled threshold caps everything at one region.
  CHECK(worst_case_subregions(1000, std::numeric_limits<double>::infinity(), 256) == 1);

  // Rack-wide: c * N * (1 + log2 M) regions regardless of workload.
  CHECK(global_bound(1.0, 4, 256) == doctest::Approx(36.0));
  CHECK(global_bound(2.0, 4, 256) == doctest::Approx(72.0));
}

TEST_CASE("regions above threshold split once per epoch, at the midpoint") {
  Rig rig(3, kTop, 64);
  SplitController ctl(rig.regions, rig.addr, 1.0, 0.5);

  DirectoryEntry* e0 = rig.regions.instantiate(0 * kTop);
  DirectoryEntry* e1 = rig.regions.instantiate(1 * kTop);
  DirectoryEntry* e2 = rig.regions.instantiate(2 * kTop);
  e0->false_invals_epoch = 10;
  e1->false_invals_epoch = 20;
  e2->false_invals_epoch = 30;
  std::map<std::uint64_t, std::uint64_t> bf{{0, 10}, {1, 20}, {2, 30}};

  EpochReport rep = ctl.end_epoch(0, bf);
  CHECK(rep.sum_false == 60);
  CHECK(rep.threshold == doctest::Approx(20.0));
  // Strict comparison: only the f = 30 region is hot; 20 == t stays whole.
  CHECK(rep.splits == 1);
  CHECK(rep.merges == 0);
  CHECK(rep.live_regions == 4);
  rig.regions.check_partition();

  DirectoryEntry* l = rig.regions.find_covering(2 * kTop);
  DirectoryEntry* r = rig.regions.find_covering(2 * kTop + kTop / 2);
  REQUIRE(l != nullptr);
  REQUIRE(r != nullptr);
  CHECK(l->size == kTop / 2);
  CHECK(r->size == kTop / 2);

  // One level per epoch, however hot the region was: e1 (f = 20) intact.
  CHECK(rig.regions.find_covering(1 * kTop)->size == kTop);

  // Counters and the block map are consumed by the boundary.
  CHECK(bf.empty());
  for (const auto& [base, e] : rig.regions.regions()) CHECK(e.false_invals_epoch == 0);
}

TEST_CASE("a freshly split pair is not merged back in the same epoch") {
  Rig rig(2, kTop, 64);
  SplitController ctl(rig.regions, rig.addr, 1.0, 0.5);

  DirectoryEntry* hot = rig.regions.instantiate(0);
  rig.regions.instantiate(kTop)->false_invals_epoch = 1;
  hot->false_invals_epoch = 100;
  std::map<std::uint64_t, std::uint64_t> bf{{0, 100}, {1, 1}};

  EpochReport rep = ctl.end_epoch(0, bf);
  CHECK(rep.splits == 1);
  // The children inherit identical state and have zero counters; a same-epoch
  // merge scan would undo the split. The snapshot rule forbids it.
  CHECK(rep.merges == 0);
  CHECK(rig.regions.find_covering(0)->size == kTop / 2);
}

TEST_CASE("quiet buddy pairs with identical coherence state merge") {
  Rig rig(2, kTop / 2, 64);  // initial regions are half blocks: natural buddies
  SplitController ctl(rig.regions, rig.addr, 1.0, 0.5);

  DirectoryEntry* a = rig.regions.instantiate(0);
  DirectoryEntry* b = rig.regions.instantiate(kTop / 2);
  DirectoryEntry* noisy = rig.regions.instantiate(kTop);  // keeps t finite
  REQUIRE(a->size == kTop / 2);
  REQUIRE(b->size == kTop / 2);
  a->state = MsiState::kShared;
  b->state = MsiState::kShared;
  a->sharers = 0b11;
  b->sharers = 0b11;
  noisy->false_invals_epoch = 40;
  std::map<std::uint64_t, std::uint64_t> bf{{1, 40}};

  SUBCASE("identical metadata: the pair merges") {
    EpochReport rep = ctl.end_epoch(0, bf);
    // t = 40 / (1 * 2) = 20; combined f = 0 <= 0.5 * 20.
    CHECK(rep.merges == 1);
    DirectoryEntry* m = rig.regions.find_covering(0);
    CHECK(m->size == kTop);
    CHECK(m->sharers == 0b11);
    rig.regions.check_partition();
  }

  SUBCASE("different sharer sets block the merge") {
    b->sharers = 0b01;
    EpochReport rep = ctl.end_epoch(0, bf);
    CHECK(rep.merges == 0);
    CHECK(rig.regions.find_covering(0)->size == kTop / 2);
  }

  SUBCASE("combined count above the merge band blocks it") {
    // Adding pair counts moves the threshold too: sum = 61 over 2 blocks,
    // t = 30.5, band = 15.25. Combined 21 exceeds it; neither half is hot.
    a->false_invals_epoch = 11;
    b->false_invals_epoch = 10;
    bf[0] = 21;
    EpochReport rep = ctl.end_epoch(0, bf);
    CHECK(rep.merges == 0);
    CHECK(rig.regions.find_covering(0)->size == kTop / 2);
  }

}

TEST_CASE("merges never cross a top-level block boundary") {
  // Two quiet top-sized buddies with identical state would be merge bait if
  // the geometry allowed it; the third block supplies a finite threshold.
  Rig rig(3, kTop, 64);
  SplitController ctl(rig.regions, rig.addr, 1.0, 0.5);
  rig.regions.instantiate(0);
  rig.regions.instantiate(kTop);
  rig.regions.instantiate(2 * kTop)->false_invals_epoch = 40;
  std::map<std::uint64_t, std::uint64_t> bf{{2, 40}};

  EpochReport rep = ctl.end_epoch(0, bf);
  CHECK(rep.merges == 0);
  CHECK(rig.regions.find_covering(0)->size == kTop);
  CHECK(rig.regions.find_covering(kTop)->size == kTop);
  rig.regions.check_partition();
}

TEST_CASE("exhausted slot pool defers the split and flags pressure") {
  Rig rig(2, kTop, /*slots=*/2);  // both slots already used by the two regions
  SplitController ctl(rig.regions, rig.addr, 1.0, 0.5);

  rig.regions.instantiate(0)->false_invals_epoch = 50;
  rig.regions.instantiate(kTop)->false_invals_epoch = 1;
  std::map<std::uint64_t, std::uint64_t> bf{{0, 50}, {1, 1}};

  EpochReport rep = ctl.end_epoch(0, bf);
  CHECK(rep.splits == 0);
  CHECK(rep.deferred_splits == 1);
  CHECK(ctl.capacity_pressure_events() == 1);
  CHECK(rig.regions.find_covering(0)->size == kTop);
}

TEST_CASE("c reacts to directory utilization with hysteresis") {
  // 4 slots: two live regions sit exactly at 50% (neither band applies).
  Rig rig(2, kTop, 4);
  SplitController ctl(rig.regions, rig.addr, 2.0, 0.5);
  rig.regions.instantiate(0);
  rig.regions.instantiate(kTop);

  std::map<std::uint64_t, std::uint64_t> bf;
  ctl.end_epoch(0, bf);
  CHECK(ctl.c() == doctest::Approx(2.0));  // dead band: unchanged

  // Drop to 25%: c relaxes by 1.25 toward (and never below) 1.0.
  rig.regions.remove(rig.regions.find_covering(kTop));
  ctl.end_epoch(1, bf);
  CHECK(ctl.c() == doctest::Approx(1.6));
  ctl.end_epoch(2, bf);
  CHECK(ctl.c() == doctest::Approx(1.28));
  for (int i = 3; i < 10; ++i) ctl.end_epoch(i, bf);
  CHECK(ctl.c() == doctest::Approx(1.0));

  // Fill to 100%: c rises by 1.5 per epoch while the pressure lasts.
  rig.regions.instantiate(kTop);
  DirectoryEntry* e = rig.regions.find_covering(0);
  REQUIRE(rig.regions.split(e));
  rig.regions.instantiate(2 * kTop);  // 4 of 4 slots
  ctl.end_epoch(10, bf);
  CHECK(ctl.c() == doctest::Approx(1.5));
  ctl.end_epoch(11, bf);
  CHECK(ctl.c() == doctest::Approx(2.25));
}
