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

#include <map>
#include <vector>

#include "netmmu/error.hpp"
#include "netmmu/protection.hpp"
#include "netmmu/util.hpp"

using namespace netmmu;

namespace {

constexpr std::uint64_t kPage = 4096;

// Flat per-page reference: the semantics the prefix encoding must reproduce.
struct FlatPerms {
  std::map<Pdid, std::map<VirtAddr, PermissionClass>> pages;

  void set(Pdid pdid, VirtAddr base, std::uint64_t len, PermissionClass pc) {
    for (VirtAddr p = base; p < base + len; p += kPage) pages[pdid][p] = pc;
  }
  void revoke(Pdid pdid, VirtAddr base, std::uint64_t len) {
    auto it = pages.find(pdid);
    if (it == pages.end()) return;
    for (VirtAddr p = base; p < base + len; p += kPage) it->second.erase(p);
  }
  bool check(Pdid pdid, VirtAddr va, AccessType t) const {
    auto it = pages.find(pdid);
    if (it == pages.end()) return false;
    auto pit = it->second.find(align_down(va, kPage));
    return pit != it->second.end() && pit->second.admits(t);
  }
};

}  // namespace

TEST_CASE("a 12 KiB range decomposes into two prefix entries") {
  ProtectionTable pt(kPage, nullptr);
  // Base aligned to 8 KiB (largest power of two <= 12 KiB is 8 KiB).
  VmaRange vma{0x4000, 3 * kPage, 7};
  pt.set_permission(7, vma, PermissionClass::rw());
  std::vector<ProtEntry> es = pt.entries_for(7);
  REQUIRE(es.size() == 2);
  CHECK(es[0].vbase == 0x4000);
  CHECK(es[0].vlen == 2 * kPage);
  CHECK(es[1].vbase == 0x4000 + 2 * kPage);
  CHECK(es[1].vlen == kPage);
}

TEST_CASE("buddy entries with equal permissions coalesce") {
  ProtectionTable pt(kPage, nullptr);
  pt.set_permission(1, {0x0, kPage, 1}, PermissionClass::ro());
  CHECK(pt.entry_count() == 1);
  pt.set_permission(1, {kPage, kPage, 1}, PermissionClass::ro());
  // Two 4K buddies with identical class become one 8K entry.
  std::vector<ProtEntry> es = pt.entries_for(1);
  REQUIRE(es.size() == 1);
  CHECK(es[0].vbase == 0);
  CHECK(es[0].vlen == 2 * kPage);

  // A different class on the right buddy must not coalesce.
  pt.set_permission(1, {kPage, kPage, 1}, PermissionClass::rw());
  CHECK(pt.entries_for(1).size() == 2);
}

TEST_CASE("overlapping update splits the older entry (last write wins)") {
  ProtectionTable pt(kPage, nullptr);
  pt.set_permission(3, {0, 8 * kPage, 3}, PermissionClass::ro());
  // Tighten one interior page to rw; the 8-page entry must shatter around it.
  pt.set_permission(3, {3 * kPage, kPage, 3}, PermissionClass::rw());

  CHECK(pt.check(3, 3 * kPage + 5, AccessType::kWrite).allowed);
  CHECK_FALSE(pt.check(3, 2 * kPage, AccessType::kWrite).allowed);
  CHECK(pt.check(3, 2 * kPage, AccessType::kRead).allowed);
  CHECK(pt.check(3, 7 * kPage, AccessType::kRead).allowed);

  // Restoring ro over the page re-coalesces back to a single 8-page entry.
  pt.set_permission(3, {3 * kPage, kPage, 3}, PermissionClass::ro());
  CHECK(pt.entries_for(3).size() == 1);
}

TEST_CASE("checks are per pdid and deny reasons are specific") {
  ProtectionTable pt(kPage, nullptr);
  pt.set_permission(1, {0, kPage, 1}, PermissionClass::ro());

  CheckResult other = pt.check(2, 0, AccessType::kRead);
  CHECK_FALSE(other.allowed);
  CHECK(other.reason == DenyReason::kNoEntry);

  CheckResult wr = pt.check(1, 0, AccessType::kWrite);
  CHECK_FALSE(wr.allowed);
  CHECK(wr.reason == DenyReason::kPermissionMismatch);

  CHECK_THROWS_AS(pt.set_permission(1, {0, kPage, 1}, PermissionClass{false, true}), SimError);
}

TEST_CASE("revoke_all cleanses cross-pdid grants") {
  ProtectionTable pt(kPage, nullptr);
  VmaRange vma{0x10000, 4 * kPage, 1};
  pt.set_permission(1, vma, PermissionClass::rw());
  pt.set_permission(2, vma, PermissionClass::ro());  // cross-domain grant
  CHECK(pt.check(2, 0x10000, AccessType::kRead).allowed);

  pt.revoke_all(vma);
  CHECK(pt.entry_count() == 0);
  CHECK_FALSE(pt.check(1, 0x10000, AccessType::kRead).allowed);
  CHECK_FALSE(pt.check(2, 0x10000, AccessType::kRead).allowed);
}

TEST_CASE("rejected updates leave the table and budget unchanged") {
  SwitchBudget budget(16, 2);
  ProtectionTable pt(kPage, &budget);
  pt.set_permission(1, {0, 2 * kPage, 1}, PermissionClass::ro());
  CHECK(budget.rules_used(RuleCategory::kProtection) == 1);

  // 12 KiB at an 8K-aligned base needs 2 entries; only 1 rule remains.
  std::vector<ProtEntry> before = pt.entries_for(1);
  CHECK_THROWS_AS(pt.set_permission(1, {0x8000, 3 * kPage, 1}, PermissionClass::rw()),
                  SimError);
  std::vector<ProtEntry> after = pt.entries_for(1);
  REQUIRE(after.size() == before.size());
  CHECK(after[0].vbase == before[0].vbase);
  CHECK(after[0].vlen == before[0].vlen);
  CHECK(budget.rules_used(RuleCategory::kProtection) == 1);
  CHECK_FALSE(pt.check(1, 0x8000, AccessType::kWrite).allowed);
}

TEST_CASE("prefix encoding matches a flat per-page map over random updates") {
  ProtectionTable pt(kPage, nullptr);
  FlatPerms ref;
  DetRng rng(11);
  const std::uint64_t kSpanPages = 64;

  for (int step = 0; step < 500; ++step) {
    // Pick an allocator-shaped range: power-of-two length, base aligned to it.
    std::uint64_t len_pages = std::uint64_t{1} << rng.below(4);  // 1..8 pages
    std::uint64_t slots = kSpanPages / len_pages;
    VirtAddr base = rng.below(slots) * len_pages * kPage;
    Pdid pdid = static_cast<Pdid>(1 + rng.below(3));
    VmaRange vma{base, len_pages * kPage, pdid};

    std::uint64_t roll = rng.below(4);
    if (roll == 0) {
      pt.revoke(pdid, vma);
      ref.revoke(pdid, base, vma.length);
    } else {
      PermissionClass pc = roll == 1 ? PermissionClass::ro() : PermissionClass::rw();
      pt.set_permission(pdid, vma, pc);
      ref.set(pdid, base, vma.length, pc);
    }

    // Spot-check a batch of random probes every step.
    for (int probe = 0; probe < 16; ++probe) {
      VirtAddr va = rng.below(kSpanPages * kPage);
      Pdid who = static_cast<Pdid>(1 + rng.below(3));
      AccessType t = rng.chance(0.5) ? AccessType::kRead : AccessType::kWrite;
      CHECK(pt.check(who, va, t).allowed == ref.check(who, va, t));
    }
  }

  // Entry geometry invariants hold at the end of the fuzz run.
  for (Pdid pdid : {1u, 2u, 3u}) {
    for (const ProtEntry& e : pt.entries_for(pdid)) {
      CHECK(is_pow2(e.vlen));
      CHECK(e.vlen >= kPage);
      CHECK(e.vbase % e.vlen == 0);
    }
  }
}
