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

#include "netmmu/addrspace.hpp"

#include <algorithm>

#include "netmmu/util.hpp"

namespace netmmu {

AddressSpace::AddressSpace(std::uint64_t page_size, SwitchBudget* budget)
    : page_size_(page_size), budget_(budget) {
  if (!is_pow2(page_size)) {
    throw SimError(ErrKind::kConfig, "page size must be a power of two");
  }
}

MemBladeId AddressSpace::register_memory_blade(std::uint64_t capacity) {
  if (capacity == 0 || capacity % page_size_ != 0) {
    throw SimError(ErrKind::kAlignment,
                   "blade capacity must be a positive multiple of the page size");
  }
  if (budget_) budget_->reserve_rules(RuleCategory::kTranslation, 1);
  Blade b;
  b.window_base = next_window_base_;
  b.capacity = capacity;
  b.holes.emplace(b.window_base, capacity);
  blades_.push_back(std::move(b));
  next_window_base_ += capacity;
  return MemBladeId{static_cast<std::uint32_t>(blades_.size() - 1)};
}

std::optional<VirtAddr> AddressSpace::fit_hole(const Blade& blade, std::uint64_t len) const {
  // First fit in address order; the candidate base inside each hole is the
  // first len-aligned position.
  for (const auto& [hb, hl] : blade.holes) {
    VirtAddr cand = align_up(hb, len);
    if (cand >= hb && cand + len <= hb + hl) return cand;
  }
  return std::nullopt;
}

void AddressSpace::carve(Blade& blade, VirtAddr base, std::uint64_t len) {
  auto it = blade.holes.upper_bound(base);
  if (it == blade.holes.begin()) throw SimError(ErrKind::kInternal, "carve miss");
  --it;
  VirtAddr hb = it->first;
  std::uint64_t hl = it->second;
  if (base < hb || base + len > hb + hl) throw SimError(ErrKind::kInternal, "carve overflow");
  blade.holes.erase(it);
  if (base > hb) blade.holes.emplace(hb, base - hb);
  if (base + len < hb + hl) blade.holes.emplace(base + len, hb + hl - (base + len));
}

void AddressSpace::uncarve(Blade& blade, VirtAddr base, std::uint64_t len) {
  // Insert the hole and coalesce with both neighbors eagerly.
  auto [it, ok] = blade.holes.emplace(base, len);
  if (!ok) throw SimError(ErrKind::kInternal, "double free into hole list");
  if (it != blade.holes.begin()) {
    auto prev = std::prev(it);
    if (prev->first + prev->second == it->first) {
      prev->second += it->second;
      blade.holes.erase(it);
      it = prev;
    }
  }
  auto next = std::next(it);
  if (next != blade.holes.end() && it->first + it->second == next->first) {
    it->second += next->second;
    blade.holes.erase(next);
  }
}

VmaRange AddressSpace::alloc_vma(Pdid pdid, std::uint64_t size) {
  if (size == 0) throw SimError(ErrKind::kAlignment, "zero-length allocation");
  std::uint64_t len = ceil_pow2(std::max(size, page_size_));

  // Candidate order: least allocated first, ties by lowest blade id. The
  // preferred blade may be unable to fit the aligned run, in which case the
  // next candidates are tried; only a global miss is out-of-memory.
  std::vector<std::uint32_t> order(blades_.size());
  for (std::uint32_t i = 0; i < blades_.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return blades_[a].allocated < blades_[b].allocated;
  });

  for (std::uint32_t bi : order) {
    Blade& blade = blades_[bi];
    if (auto base = fit_hole(blade, len)) {
      carve(blade, *base, len);
      blade.allocated += len;
      VmaRange vma{*base, len, pdid};
      vmas_.emplace(vma.base, vma);
      return vma;
    }
  }
  throw SimError(ErrKind::kOutOfMemory, "no blade has a free aligned hole for the request");
}

void AddressSpace::free_vma(const VmaRange& vma) {
  auto it = vmas_.find(vma.base);
  if (it == vmas_.end() || it->second.length != vma.length || it->second.pdid != vma.pdid) {
    throw SimError(ErrKind::kInvalidFree, "free of a range that is not a live allocation");
  }
  // The vma lies inside exactly one blade window by construction.
  for (auto& blade : blades_) {
    if (vma.base >= blade.window_base && vma.end() <= blade.window_base + blade.capacity) {
      uncarve(blade, vma.base, vma.length);
      blade.allocated -= vma.length;
      vmas_.erase(it);
      return;
    }
  }
  throw SimError(ErrKind::kInternal, "live vma outside every blade window");
}

std::optional<PhysLoc> AddressSpace::try_translate(VirtAddr va) const {
  // Outliers are more specific than primary windows; among nested outliers
  // the smallest containing range wins. Walk candidates with base <= va,
  // bounded by the largest outlier length ever installed.
  if (!outliers_.empty()) {
    const Outlier* best = nullptr;
    auto it = outliers_.upper_bound(va);
    while (it != outliers_.begin()) {
      --it;
      const Outlier& o = it->second;
      if (o.vbase + o.vlen > va) {
        if (!best || o.vlen < best->vlen) best = &o;
      }
      if (va - it->first >= max_outlier_len_) break;
    }
    if (best) return PhysLoc{best->blade, best->pbase + (va - best->vbase)};
  }
  for (std::uint32_t i = 0; i < blades_.size(); ++i) {
    const Blade& b = blades_[i];
    if (va >= b.window_base && va < b.window_base + b.capacity) {
      return PhysLoc{MemBladeId{i}, va - b.window_base};
    }
  }
  return std::nullopt;
}

PhysLoc AddressSpace::translate(VirtAddr va) const {
  auto loc = try_translate(va);
  if (!loc) throw SimError(ErrKind::kTranslationFault, "address outside registered space");
  return *loc;
}

void AddressSpace::add_outlier(VirtAddr vbase, std::uint64_t vlen, MemBladeId blade,
                               std::uint64_t pbase) {
  if (!is_pow2(vlen) || vlen < page_size_ || vbase % vlen != 0 || pbase % page_size_ != 0) {
    throw SimError(ErrKind::kAlignment, "outlier range must be an aligned power of two");
  }
  bool inside = false;
  for (const auto& b : blades_) {
    if (vbase >= b.window_base && vbase + vlen <= b.window_base + b.capacity) inside = true;
  }
  if (!inside) {
    throw SimError(ErrKind::kTranslationFault, "outlier source outside registered space");
  }
  if (blade.index >= blades_.size()) {
    throw SimError(ErrKind::kTranslationFault, "outlier target blade not registered");
  }
  Blade& target = blades_[blade.index];
  if (pbase + vlen > target.capacity) {
    throw SimError(ErrKind::kAlignment, "outlier target beyond blade capacity");
  }
  // The destination must be free; reserve it so the allocator skips it.
  VirtAddr tbase = target.window_base + pbase;
  auto it = target.holes.upper_bound(tbase);
  if (it == target.holes.begin()) {
    throw SimError(ErrKind::kCapacity, "outlier destination region not free on target blade");
  }
  --it;
  if (tbase < it->first || tbase + vlen > it->first + it->second) {
    throw SimError(ErrKind::kCapacity, "outlier destination region not free on target blade");
  }
  if (budget_) budget_->reserve_rules(RuleCategory::kOutlier, 1);
  carve(target, tbase, vlen);
  outliers_.emplace(vbase, Outlier{vbase, vlen, blade, pbase});
  max_outlier_len_ = std::max(max_outlier_len_, vlen);
}

double AddressSpace::fairness_index() const {
  double sum = 0.0, sumsq = 0.0;
  for (const auto& b : blades_) {
    double x = static_cast<double>(b.allocated);
    sum += x;
    sumsq += x * x;
  }
  if (blades_.empty()) return 1.0;
  if (sumsq == 0.0) return 1.0;  // all-zero loads: perfectly fair by convention
  return (sum * sum) / (static_cast<double>(blades_.size()) * sumsq);
}

std::vector<BladeLoad> AddressSpace::blade_loads() const {
  std::vector<BladeLoad> out;
  out.reserve(blades_.size());
  for (std::uint32_t i = 0; i < blades_.size(); ++i) {
    out.push_back({MemBladeId{i}, blades_[i].capacity, blades_[i].allocated});
  }
  return out;
}

std::optional<VmaRange> AddressSpace::find_vma(VirtAddr base) const {
  auto it = vmas_.find(base);
  if (it == vmas_.end()) return std::nullopt;
  return it->second;
}

std::set<std::uint64_t> AddressSpace::allocated_block_set(std::uint64_t block_size) const {
  std::set<std::uint64_t> blocks;
  for (const auto& [base, vma] : vmas_) {
    for (std::uint64_t blk = vma.base / block_size; blk <= (vma.end() - 1) / block_size; ++blk) {
      blocks.insert(blk);
    }
  }
  return blocks;
}

}  // namespace netmmu
