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

#include "netmmu/protection.hpp"

#include <algorithm>

#include "netmmu/error.hpp"
#include "netmmu/util.hpp"

namespace netmmu {

std::vector<std::pair<VirtAddr, std::uint64_t>> ProtectionTable::decompose(VirtAddr lo,
                                                                           VirtAddr hi) const {
  std::vector<std::pair<VirtAddr, std::uint64_t>> out;
  while (lo < hi) {
    std::uint64_t block = std::min(alignment_of(lo), floor_pow2(hi - lo));
    out.emplace_back(lo, block);
    lo += block;
  }
  return out;
}

void ProtectionTable::coalesce(PdidMap& m) {
  // Single ascending sweep; after merging, retry the merged entry against its
  // new successor so chains collapse in one pass.
  auto it = m.begin();
  while (it != m.end()) {
    auto next = std::next(it);
    if (next == m.end()) break;
    ProtEntry& a = it->second;
    ProtEntry& b = next->second;
    if (a.end() == b.vbase && a.vlen == b.vlen && a.pc == b.pc &&
        a.vbase % (2 * a.vlen) == 0) {
      a.vlen *= 2;
      m.erase(next);
      // Merged block may now pair with its own buddy; also look back one, in
      // case the predecessor became the left buddy of the grown entry.
      if (it != m.begin()) --it;
      continue;
    }
    ++it;
  }
}

void ProtectionTable::erase_range(PdidMap& m, Pdid pdid, VirtAddr lo, VirtAddr hi) const {
  // Candidate entries: the one possibly straddling lo plus everything with
  // base in [lo, hi).
  std::vector<ProtEntry> touched;
  auto it = m.lower_bound(lo);
  if (it != m.begin()) {
    auto prev = std::prev(it);
    if (prev->second.end() > lo) touched.push_back(prev->second);
  }
  for (; it != m.end() && it->first < hi; ++it) touched.push_back(it->second);

  for (const ProtEntry& e : touched) {
    m.erase(e.vbase);
    // Keep the aligned pieces of the entry outside [lo, hi).
    for (auto [rb, re] : {std::pair<VirtAddr, VirtAddr>{e.vbase, std::min(lo, e.end())},
                          std::pair<VirtAddr, VirtAddr>{std::max(hi, e.vbase), e.end()}}) {
      if (rb >= re) continue;
      for (auto [pb, pl] : decompose(rb, re)) {
        m.emplace(pb, ProtEntry{pdid, pb, pl, e.pc});
      }
    }
  }
}

void ProtectionTable::commit(Pdid pdid, PdidMap&& next) {
  auto& cur = tables_[pdid];
  std::uint64_t before = cur.size();
  std::uint64_t after = next.size();
  if (budget_) {
    if (after > before) {
      if (!budget_->try_reserve_rules(RuleCategory::kProtection, after - before)) {
        throw SimError(ErrKind::kCapacity, "protection rule budget exhausted; table unchanged");
      }
    } else if (before > after) {
      budget_->release_rules(RuleCategory::kProtection, before - after);
    }
  }
  total_entries_ += after;
  total_entries_ -= before;
  cur = std::move(next);
  if (cur.empty()) tables_.erase(pdid);
}

std::uint64_t ProtectionTable::set_permission(Pdid pdid, const VmaRange& vma,
                                              PermissionClass pc) {
  if (vma.length == 0) throw SimError(ErrKind::kAlignment, "empty permission range");
  if (pc.writable && !pc.readable) {
    throw SimError(ErrKind::kEncoding, "write permission implies read");
  }
  VirtAddr lo = align_down(vma.base, page_size_);
  VirtAddr hi = align_up(vma.base + vma.length, page_size_);
  // Allocator alignment policy: base aligned to the largest power of two not
  // exceeding the length. Anything looser cannot be encoded within the entry
  // bounds this table promises.
  if (lo % floor_pow2(hi - lo) != 0) {
    throw SimError(ErrKind::kAlignment, "permission range base lacks allocator alignment");
  }

  PdidMap next = tables_.count(pdid) ? tables_.at(pdid) : PdidMap{};
  erase_range(next, pdid, lo, hi);
  for (auto [pb, pl] : decompose(lo, hi)) {
    next.emplace(pb, ProtEntry{pdid, pb, pl, pc});
  }
  coalesce(next);
  commit(pdid, std::move(next));

  std::uint64_t covering = 0;
  for (const auto& e : entries_in(pdid, lo, hi)) {
    (void)e;
    ++covering;
  }
  return covering;
}

std::uint64_t ProtectionTable::revoke(Pdid pdid, const VmaRange& vma) {
  VirtAddr lo = align_down(vma.base, page_size_);
  VirtAddr hi = align_up(vma.base + vma.length, page_size_);
  auto it = tables_.find(pdid);
  if (it == tables_.end()) return 0;
  PdidMap next = it->second;
  std::uint64_t before = next.size();
  erase_range(next, pdid, lo, hi);
  coalesce(next);
  std::uint64_t after = next.size();
  commit(pdid, std::move(next));
  return before > after ? before - after : 0;
}

void ProtectionTable::revoke_all(const VmaRange& vma) {
  // Pdid list snapshotted first: revoke() drops a table that becomes empty.
  std::vector<Pdid> pdids;
  pdids.reserve(tables_.size());
  for (const auto& [pdid, m] : tables_) pdids.push_back(pdid);
  for (Pdid pdid : pdids) revoke(pdid, vma);
}

CheckResult ProtectionTable::check(Pdid pdid, VirtAddr va, AccessType t) const {
  auto it = tables_.find(pdid);
  if (it == tables_.end()) return {false, DenyReason::kNoEntry};
  const PdidMap& m = it->second;
  auto e = m.upper_bound(va);
  if (e == m.begin()) return {false, DenyReason::kNoEntry};
  --e;
  if (e->second.end() <= va) return {false, DenyReason::kNoEntry};
  if (!e->second.pc.admits(t)) return {false, DenyReason::kPermissionMismatch};
  return {true, DenyReason::kNoEntry};
}

std::uint64_t ProtectionTable::entry_count(Pdid pdid) const {
  auto it = tables_.find(pdid);
  return it == tables_.end() ? 0 : it->second.size();
}

std::vector<ProtEntry> ProtectionTable::entries_for(Pdid pdid) const {
  std::vector<ProtEntry> out;
  auto it = tables_.find(pdid);
  if (it == tables_.end()) return out;
  out.reserve(it->second.size());
  for (const auto& [b, e] : it->second) out.push_back(e);
  return out;
}

std::vector<ProtEntry> ProtectionTable::entries_in(Pdid pdid, VirtAddr lo, VirtAddr hi) const {
  std::vector<ProtEntry> out;
  auto it = tables_.find(pdid);
  if (it == tables_.end()) return out;
  const PdidMap& m = it->second;
  auto e = m.lower_bound(lo);
  if (e != m.begin()) {
    auto prev = std::prev(e);
    if (prev->second.end() > lo) out.push_back(prev->second);
  }
  for (; e != m.end() && e->first < hi; ++e) out.push_back(e->second);
  return out;
}

}  // namespace netmmu
