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

#include "netmmu/coherence.hpp"

#include <algorithm>

#include "netmmu/error.hpp"
#include "netmmu/util.hpp"

namespace netmmu {

namespace {
// A reset replays the faulting access from scratch; each full lap survives
// only if every message class lost its entire retry budget, so the loop is
// astronomically short. The cap turns a broken model into a loud error.
constexpr int kReplayCap = 64;
}  // namespace

const char* transition_name(Transition t) {
  switch (t) {
    case Transition::kNone: return "none";
    case Transition::kIToS: return "I->S";
    case Transition::kIToM: return "I->M";
    case Transition::kSToS: return "S->S";
    case Transition::kSharerRefetch: return "S->S(refetch)";
    case Transition::kSToM: return "S->M";
    case Transition::kOwnerRefetch: return "M->M(owner)";
    case Transition::kMToS: return "M->S";
    case Transition::kMToM: return "M->M";
  }
  return "?";
}

BladeCache::Entry* BladeCache::find(VirtAddr page) {
  auto it = pages_.find(page);
  return it == pages_.end() ? nullptr : &it->second;
}

void BladeCache::touch(VirtAddr page) {
  auto it = pages_.find(page);
  if (it == pages_.end()) return;
  lru_.erase(it->second.lru_pos);
  lru_.push_front(page);
  it->second.lru_pos = lru_.begin();
}

std::optional<BladeCache::Evicted> BladeCache::insert(VirtAddr page, PermissionClass pc,
                                                      ValueTag tag, bool dirty) {
  auto it = pages_.find(page);
  if (it != pages_.end()) {
    it->second.pc = pc;
    it->second.tag = tag;
    it->second.dirty = dirty;
    touch(page);
    return std::nullopt;
  }
  std::optional<Evicted> victim;
  if (pages_.size() >= capacity_) {
    VirtAddr lru_page = lru_.back();
    auto v = pages_.find(lru_page);
    victim = Evicted{lru_page, v->second.dirty, v->second.tag};
    lru_.pop_back();
    pages_.erase(v);
  }
  lru_.push_front(page);
  Entry e;
  e.dirty = dirty;
  e.pc = pc;
  e.tag = tag;
  e.lru_pos = lru_.begin();
  pages_.emplace(page, e);
  return victim;
}

void BladeCache::remove(VirtAddr page) {
  auto it = pages_.find(page);
  if (it == pages_.end()) return;
  lru_.erase(it->second.lru_pos);
  pages_.erase(it);
}

std::vector<VirtAddr> BladeCache::pages_in(VirtAddr lo, VirtAddr hi) const {
  std::vector<VirtAddr> out;
  for (auto it = pages_.lower_bound(lo); it != pages_.end() && it->first < hi; ++it) {
    out.push_back(it->first);
  }
  return out;
}

CoherenceEngine::CoherenceEngine(const AddressSpace& addr, const ProtectionTable& prot,
                                 RegionMap& regions, Fabric& fabric,
                                 std::uint32_t compute_blades, std::uint64_t cache_pages)
    : addr_(addr),
      prot_(prot),
      regions_(regions),
      fabric_(fabric),
      page_size_(regions.page_size()) {
  caches_.reserve(compute_blades);
  for (std::uint32_t i = 0; i < compute_blades; ++i) caches_.emplace_back(cache_pages);
}

ValueTag CoherenceEngine::memory_tag(VirtAddr page) const {
  auto it = memory_.find(page);
  return it == memory_.end() ? ValueTag{} : it->second;
}

std::map<VirtAddr, ValueTag> CoherenceEngine::effective_tags() const {
  std::map<VirtAddr, ValueTag> out;
  for (const auto& [page, tag] : memory_) {
    if (tag != ValueTag{}) out.emplace(page, tag);
  }
  for (const auto& cache : caches_) {
    for (const auto& [page, e] : cache.pages()) {
      if (e.dirty) out[page] = e.tag;
    }
  }
  return out;
}

void CoherenceEngine::note_false_invals(const DirectoryEntry& region, std::uint32_t count) {
  if (count == 0) return;
  if (block_false_) (*block_false_)[regions_.block_of(region.base)] += count;
}

CoherenceEngine::InvalApply CoherenceEngine::apply_invalidation(
    ComputeBladeId victim, const DirectoryEntry& region, std::optional<VirtAddr> trigger,
    InvalKind kind, std::uint64_t seq, std::uint64_t epoch) {
  InvalApply out;
  BladeCache& cache = caches_[victim.index];
  for (VirtAddr page : cache.pages_in(region.base, region.end())) {
    BladeCache::Entry* e = cache.find(page);
    if (e->dirty) {
      memory_[page] = e->tag;
      dirty_holder_.erase(page);
      fabric_.background_send(MsgKind::kWriteback, page);
      ++out.flushed;
      if (!(trigger && *trigger == page)) ++out.false_invals;
    }
    if (kind == InvalKind::kDowngrade) {
      e->dirty = false;
      e->pc = PermissionClass::ro();
    } else {
      cache.remove(page);
    }
  }
  if (kind == InvalKind::kReset || kind == InvalKind::kFreeCleanse) {
    // Failure recovery and teardown flush data but are not a granularity
    // effect; they stay out of the false-invalidation statistics.
    out.false_invals = 0;
  }
  if (logs_) {
    InvalRecord r;
    r.seq = seq;
    r.kind = kind;
    r.victim = victim.index;
    r.region_base = region.base;
    r.region_size = region.size;
    r.has_trigger = trigger.has_value();
    r.trigger_page = trigger.value_or(0);
    r.flushed = out.flushed;
    r.false_invals = out.false_invals;
    r.epoch = epoch;
    logs_->invals.push_back(r);
  }
  return out;
}

std::uint32_t CoherenceEngine::do_reset(DirectoryEntry* entry, std::uint64_t seq,
                                        std::uint64_t epoch) {
  fabric_.reset_broadcast(entry->base);
  std::uint32_t flushed = 0;
  for (std::uint32_t b = 0; b < caches_.size(); ++b) {
    flushed +=
        apply_invalidation(ComputeBladeId{b}, *entry, std::nullopt, InvalKind::kReset, seq,
                           epoch)
            .flushed;
  }
  regions_.remove(entry);
  return flushed;
}

void CoherenceEngine::reset_address(VirtAddr va, std::uint64_t seq, std::uint64_t epoch) {
  DirectoryEntry* e = regions_.find_covering(align_down(va, page_size_));
  if (!e) return;
  do_reset(e, seq, epoch);
}

DirectoryEntry* CoherenceEngine::instantiate_with_policy(VirtAddr page, std::uint64_t seq,
                                                         std::uint64_t epoch,
                                                         AccessOutcome& out) {
  DirectoryEntry* e = regions_.instantiate(page);
  if (e) return e;

  // No free slot. A state-I entry holds no cached data anywhere (entries are
  // born I and never return to it while live), so dropping one is free.
  for (auto& [base, cand] : regions_.regions()) {
    if (cand.state == MsiState::kInvalid) {
      regions_.remove(&cand);
      e = regions_.instantiate(page);
      if (!e) throw SimError(ErrKind::kInternal, "slot still unavailable after reclaim");
      return e;
    }
  }

  // Last resort: reset the least recently touched region. This is recorded
  // as capacity pressure; the run's exit status reflects it.
  DirectoryEntry* victim = nullptr;
  for (auto& [base, cand] : regions_.regions()) {
    if (!victim || cand.last_touch_seq < victim->last_touch_seq) victim = &cand;
  }
  if (!victim) throw SimError(ErrKind::kInternal, "slot pool empty with no live regions");
  do_reset(victim, seq, epoch);
  ++capacity_pressure_;
  ++forced_resets_;
  out.capacity_pressure = true;
  e = regions_.instantiate(page);
  if (!e) throw SimError(ErrKind::kInternal, "slot still unavailable after forced reset");
  return e;
}

void CoherenceEngine::handle_eviction(ComputeBladeId blade, VirtAddr page, std::uint64_t seq) {
  BladeCache& cache = caches_[blade.index];
  BladeCache::Entry* e = cache.find(page);
  if (!e) return;
  if (e->dirty) {
    memory_[page] = e->tag;
    dirty_holder_.erase(page);
    fabric_.background_send(MsgKind::kWriteback, page);
  }
  if (logs_) logs_->evicts.push_back(EvictRecord{seq, blade.index, page, e->dirty});
  cache.remove(page);
}

void CoherenceEngine::fill_cache(ComputeBladeId blade, VirtAddr page, AccessType type,
                                 std::uint64_t seq, AccessOutcome& out) {
  BladeCache& cache = caches_[blade.index];
  PermissionClass pc =
      type == AccessType::kWrite ? PermissionClass::rw() : PermissionClass::ro();
  auto victim = cache.insert(page, pc, memory_tag(page), /*dirty=*/false);
  if (victim) {
    ++out.evictions;
    if (victim->dirty) {
      memory_[victim->page] = victim->tag;
      dirty_holder_.erase(victim->page);
      fabric_.background_send(MsgKind::kWriteback, victim->page);
    }
    if (logs_) logs_->evicts.push_back(EvictRecord{seq, blade.index, victim->page, victim->dirty});
  }
  BladeCache::Entry* e = cache.find(page);
  if (type == AccessType::kWrite) {
    auto holder = dirty_holder_.find(page);
    if (holder != dirty_holder_.end() && holder->second != blade.index) {
      throw SimError(ErrKind::kInternal, "single-writer invariant violated");
    }
    e->dirty = true;
    e->tag = ValueTag{tag_writer(blade), seq};
    dirty_holder_[page] = blade.index;
  }
  if (!out.read_tag && type == AccessType::kRead) out.read_tag = e->tag;
}

AccessOutcome CoherenceEngine::access(ComputeBladeId blade, Pdid pdid, VirtAddr va,
                                      AccessType type, std::uint64_t seq, double issue_us,
                                      std::uint64_t epoch) {
  AccessOutcome out;
  if (!addr_.try_translate(va)) {
    out.served = Served::kFault;
    out.latency_us = fabric_.deny_cost();
    return out;
  }
  CheckResult chk = prot_.check(pdid, va, type);
  if (!chk.allowed) {
    out.served = Served::kDenied;
    out.deny_reason = chk.reason;
    out.latency_us = fabric_.deny_cost();
    return out;
  }

  VirtAddr page = align_down(va, page_size_);
  BladeCache& cache = caches_[blade.index];
  if (BladeCache::Entry* e = cache.find(page); e && e->pc.admits(type)) {
    cache.touch(page);
    if (type == AccessType::kWrite) {
      auto holder = dirty_holder_.find(page);
      if (holder != dirty_holder_.end() && holder->second != blade.index) {
        throw SimError(ErrKind::kInternal, "single-writer invariant violated");
      }
      e->dirty = true;
      e->tag = ValueTag{tag_writer(blade), seq};
      dirty_holder_[page] = blade.index;
    } else {
      out.read_tag = e->tag;
    }
    out.served = Served::kLocal;
    out.latency_us = fabric_.local_hit_cost();
    return out;
  }

  // Fault path: the request reaches the switch, the transition is resolved
  // from the directory, and every transition costs one recirculation (already
  // folded into the fetch/flush round constants).
  double egress = issue_us + fabric_.latency().one_way_hop_us +
                  fabric_.latency().switch_pipeline_us;
  out.served = Served::kRemote;

  DirectoryEntry* entry = regions_.find_covering(page);
  if (!entry) entry = instantiate_with_policy(page, seq, epoch, out);

  for (int lap = 0;; ++lap) {
    if (lap >= kReplayCap) {
      throw SimError(ErrKind::kInternal, "access replay cap exceeded");
    }
    entry->last_touch_seq = seq;
    bool needs_reset = false;
    double inval_latency = 0.0;
    double flush_latency = 0.0;
    bool sequential_flush = false;

    switch (entry->state) {
      case MsiState::kInvalid: {
        out.transition = type == AccessType::kWrite ? Transition::kIToM : Transition::kIToS;
        break;
      }
      case MsiState::kShared: {
        if (type == AccessType::kRead) {
          out.transition = entry->has_sharer(blade) ? Transition::kSharerRefetch
                                                    : Transition::kSToS;
        } else {
          out.transition = Transition::kSToM;
          // Multicast filtered at egress: only current sharers other than
          // the requester receive the invalidation, in parallel.
          std::uint32_t recipients = entry->sharers & ~(1u << blade.index);
          std::uint32_t flushed_total = 0;
          for (std::uint32_t b = 0; b < caches_.size(); ++b) {
            if (!((recipients >> b) & 1u)) continue;
            auto leg = fabric_.inval_leg(ComputeBladeId{b}, egress, /*flush_shape=*/false,
                                         page);
            if (leg.applied) {
              auto eff = apply_invalidation(ComputeBladeId{b}, *entry, page,
                                            InvalKind::kFull, seq, epoch);
              flushed_total += eff.flushed;
              out.pages_flushed += eff.flushed;
              out.false_invalidations += eff.false_invals;
              entry->false_invals_epoch += eff.false_invals;
              note_false_invals(*entry, eff.false_invals);
              ++out.invalidations_sent;
            }
            inval_latency = std::max(inval_latency, leg.latency_us);
            if (!leg.delivered) needs_reset = true;
          }
          if (flushed_total != 0) {
            throw SimError(ErrKind::kInternal, "dirty page encountered under state S");
          }
        }
        break;
      }
      case MsiState::kModified: {
        if (entry->owner == static_cast<std::int32_t>(blade.index)) {
          out.transition = Transition::kOwnerRefetch;
          break;
        }
        // Sequential path: the owner is flushed and invalidated (or
        // downgraded for a read) before the memory fetch proceeds.
        out.transition = type == AccessType::kWrite ? Transition::kMToM : Transition::kMToS;
        sequential_flush = true;
        ComputeBladeId owner{static_cast<std::uint32_t>(entry->owner)};
        auto leg = fabric_.inval_leg(owner, egress, /*flush_shape=*/true, page);
        if (leg.applied) {
          InvalKind kind =
              type == AccessType::kRead ? InvalKind::kDowngrade : InvalKind::kFull;
          auto eff = apply_invalidation(owner, *entry, page, kind, seq, epoch);
          out.pages_flushed += eff.flushed;
          out.false_invalidations += eff.false_invals;
          entry->false_invals_epoch += eff.false_invals;
          note_false_invals(*entry, eff.false_invals);
          ++out.invalidations_sent;
        }
        flush_latency = leg.latency_us;
        if (!leg.delivered) needs_reset = true;
        break;
      }
    }

    LegOutcome fetch{};
    if (!needs_reset) {
      fetch = fabric_.fetch_leg(page);
      if (!fetch.delivered) needs_reset = true;
    }

    if (needs_reset) {
      // Timeout costs of the failed legs are real waiting time.
      out.latency_us += flush_latency + inval_latency + fetch.latency_us;
      out.pages_flushed += do_reset(entry, seq, epoch);
      ++out.resets;
      // The faulting access replays as a first touch of the now-empty area.
      entry = instantiate_with_policy(page, seq, epoch, out);
      continue;
    }

    if (sequential_flush) {
      out.latency_us += flush_latency + fetch.latency_us;
    } else {
      out.latency_us += std::max(fetch.latency_us, inval_latency);
    }

    // Commit the directory transition.
    switch (out.transition) {
      case Transition::kIToS:
        entry->state = MsiState::kShared;
        entry->sharers = 1u << blade.index;
        entry->owner = -1;
        break;
      case Transition::kIToM:
        entry->state = MsiState::kModified;
        entry->sharers = 1u << blade.index;
        entry->owner = static_cast<std::int32_t>(blade.index);
        break;
      case Transition::kSToS:
      case Transition::kSharerRefetch:
        entry->add_sharer(blade);
        break;
      case Transition::kSToM:
        entry->state = MsiState::kModified;
        entry->sharers = 1u << blade.index;
        entry->owner = static_cast<std::int32_t>(blade.index);
        break;
      case Transition::kOwnerRefetch:
        break;
      case Transition::kMToS: {
        // Old owner keeps clean read-only copies and stays a sharer.
        std::uint32_t old_owner = static_cast<std::uint32_t>(entry->owner);
        entry->state = MsiState::kShared;
        entry->sharers = (1u << old_owner) | (1u << blade.index);
        entry->owner = -1;
        break;
      }
      case Transition::kMToM:
        entry->sharers = 1u << blade.index;
        entry->owner = static_cast<std::int32_t>(blade.index);
        break;
      case Transition::kNone:
        throw SimError(ErrKind::kInternal, "remote access without a transition");
    }
    break;
  }

  fill_cache(blade, page, type, seq, out);
  return out;
}

void CoherenceEngine::on_free(const VmaRange& vma, std::uint64_t seq, std::uint64_t epoch) {
  // Dropped without writeback: the data dies with the allocation.
  for (std::uint32_t b = 0; b < caches_.size(); ++b) {
    BladeCache& cache = caches_[b];
    for (VirtAddr page : cache.pages_in(vma.base, vma.end())) {
      dirty_holder_.erase(page);
      cache.remove(page);
    }
  }
  for (VirtAddr page = vma.base; page < vma.end(); page += page_size_) {
    memory_.erase(page);
  }
  std::vector<VirtAddr> doomed;
  for (auto& [base, e] : regions_.regions()) {
    if (base >= vma.base && e.end() <= vma.end()) doomed.push_back(base);
  }
  for (VirtAddr base : doomed) {
    regions_.remove(&regions_.regions().at(base));
  }
  (void)seq;
  (void)epoch;
}

}  // namespace netmmu
