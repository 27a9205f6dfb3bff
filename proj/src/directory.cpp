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

#include "netmmu/directory.hpp"

#include <algorithm>

namespace netmmu {

SlotPool::SlotPool(std::uint32_t capacity, SwitchBudget* budget)
    : capacity_(capacity), budget_(budget) {
  free_.reserve(capacity);
  // Pushed in descending order so the LIFO hands out 0, 1, 2, ... initially.
  for (std::uint32_t i = capacity; i-- > 0;) free_.push_back(i);
}

std::optional<std::uint32_t> SlotPool::take(VirtAddr base) {
  if (free_.empty()) return std::nullopt;
  if (budget_ && !budget_->try_reserve_directory(1)) return std::nullopt;
  std::uint32_t slot = free_.back();
  free_.pop_back();
  auto [it, ok] = used_.emplace(base, slot);
  if (!ok) throw SimError(ErrKind::kInternal, "slot already bound for region base");
  return slot;
}

void SlotPool::release(VirtAddr base) {
  auto it = used_.find(base);
  if (it == used_.end()) throw SimError(ErrKind::kInternal, "release of unbound slot");
  free_.push_back(it->second);
  used_.erase(it);
  if (budget_) budget_->release_directory(1);
}

void SlotPool::move_key(VirtAddr from, VirtAddr to) {
  auto it = used_.find(from);
  if (it == used_.end()) throw SimError(ErrKind::kInternal, "move of unbound slot");
  std::uint32_t slot = it->second;
  used_.erase(it);
  used_.emplace(to, slot);
}

RegionMap::RegionMap(std::uint64_t page_size, std::uint64_t initial_size, std::uint64_t top_size,
                     std::uint32_t slot_capacity, SwitchBudget* budget)
    : page_size_(page_size),
      initial_size_(initial_size),
      top_size_(top_size),
      pool_(slot_capacity, budget) {
  if (!is_pow2(page_size) || !is_pow2(initial_size) || !is_pow2(top_size) ||
      initial_size < page_size || top_size < initial_size) {
    throw SimError(ErrKind::kConfig,
                   "region sizes must be powers of two with page <= initial <= top");
  }
}

DirectoryEntry* RegionMap::find_covering(VirtAddr va) {
  auto it = regions_.upper_bound(va);
  if (it == regions_.begin()) return nullptr;
  --it;
  return it->second.contains(va) ? &it->second : nullptr;
}

const DirectoryEntry* RegionMap::find_covering(VirtAddr va) const {
  auto it = regions_.upper_bound(va);
  if (it == regions_.begin()) return nullptr;
  --it;
  return it->second.contains(va) ? &it->second : nullptr;
}

bool RegionMap::covered(VirtAddr lo, VirtAddr hi) const {
  auto it = regions_.upper_bound(lo);
  if (it != regions_.begin()) {
    auto prev = std::prev(it);
    if (prev->second.end() > lo) return true;
  }
  return it != regions_.end() && it->first < hi;
}

DirectoryEntry* RegionMap::instantiate(VirtAddr va) {
  // Descend from the initial size until the aligned block containing va is
  // uncovered. Normally the first candidate wins; after a reset or a free
  // left a smaller hole, the descent lands exactly on it. A page-sized block
  // is always reachable because va itself is uncovered.
  std::uint64_t size = initial_size_;
  VirtAddr base = align_down(va, size);
  while (covered(base, base + size)) {
    size /= 2;
    if (size < page_size_) {
      throw SimError(ErrKind::kInternal, "instantiate called for a covered page");
    }
    base = align_down(va, size);
  }
  auto slot = pool_.take(base);
  if (!slot) return nullptr;
  DirectoryEntry e;
  e.base = base;
  e.size = size;
  e.slot = *slot;
  auto [it, ok] = regions_.emplace(base, e);
  if (!ok) throw SimError(ErrKind::kInternal, "region already present at base");
  return &it->second;
}

bool RegionMap::split(DirectoryEntry* e) {
  if (e->size <= page_size_) throw SimError(ErrKind::kInternal, "split below page size");
  VirtAddr mid = e->base + e->size / 2;
  auto slot = pool_.take(mid);
  if (!slot) return false;

  DirectoryEntry right = *e;
  right.base = mid;
  right.size = e->size / 2;
  right.slot = *slot;
  right.false_invals_epoch = 0;

  e->size /= 2;
  e->false_invals_epoch = 0;
  regions_.emplace(mid, right);
  return true;
}

DirectoryEntry* RegionMap::merge(DirectoryEntry* left, DirectoryEntry* right) {
  if (left->end() != right->base || left->size != right->size ||
      left->base % (2 * left->size) != 0) {
    throw SimError(ErrKind::kInternal, "merge of a non-buddy pair");
  }
  if (left->state != right->state || left->sharers != right->sharers ||
      left->owner != right->owner) {
    throw SimError(ErrKind::kInternal, "merge of unequal coherence state");
  }
  pool_.release(right->base);
  left->size *= 2;
  left->false_invals_epoch += right->false_invals_epoch;
  left->last_touch_seq = std::max(left->last_touch_seq, right->last_touch_seq);
  regions_.erase(right->base);
  return left;
}

void RegionMap::remove(DirectoryEntry* e) {
  pool_.release(e->base);
  regions_.erase(e->base);
}

void RegionMap::check_partition() const {
  VirtAddr prev_end = 0;
  bool first = true;
  for (const auto& [base, e] : regions_) {
    if (!is_pow2(e.size) || e.size < page_size_ || e.size > top_size_ ||
        base % e.size != 0) {
      throw SimError(ErrKind::kInternal, "region alignment violated");
    }
    if (base / top_size_ != (e.end() - 1) / top_size_) {
      throw SimError(ErrKind::kInternal, "region straddles a top-level block");
    }
    if (!first && base < prev_end) {
      throw SimError(ErrKind::kInternal, "regions overlap");
    }
    prev_end = e.end();
    first = false;
  }
  if (pool_.used() != regions_.size()) {
    throw SimError(ErrKind::kInternal, "slot accounting diverged from live regions");
  }
}

}  // namespace netmmu
