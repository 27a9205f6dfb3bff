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

#ifndef NETMMU_COHERENCE_HPP_
#define NETMMU_COHERENCE_HPP_

#include <cstdint>
#include <list>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "netmmu/addrspace.hpp"
#include "netmmu/directory.hpp"
#include "netmmu/fabric.hpp"
#include "netmmu/protection.hpp"
#include "netmmu/types.hpp"

namespace netmmu {

enum class Transition : std::uint8_t {
  kNone = 0,
  kIToS,
  kIToM,
  kSToS,           // read joining the sharer set
  kSharerRefetch,  // read by an existing sharer whose page was evicted
  kSToM,
  kOwnerRefetch,   // owner access under M after local eviction / class upgrade
  kMToS,
  kMToM,
};

const char* transition_name(Transition t);

enum class Served : std::uint8_t { kLocal, kRemote, kDenied, kFault };

struct AccessOutcome {
  Served served = Served::kRemote;
  Transition transition = Transition::kNone;
  double latency_us = 0.0;
  std::uint32_t invalidations_sent = 0;  // invalidation recipients reached
  std::uint32_t pages_flushed = 0;
  std::uint32_t false_invalidations = 0;
  std::uint32_t evictions = 0;
  std::uint32_t resets = 0;
  bool capacity_pressure = false;  // a forced reset reclaimed a directory slot
  std::optional<ValueTag> read_tag;
  DenyReason deny_reason = DenyReason::kNoEntry;
};

// Structured run logs captured for oracle comparison.
enum class InvalKind : std::uint8_t { kFull = 0, kDowngrade = 1, kReset = 2, kFreeCleanse = 3 };

struct AccessRecord {
  std::uint64_t seq = 0;
  std::uint32_t blade = 0;
  Pdid pdid = 0;
  AccessType type = AccessType::kRead;
  VirtAddr page = 0;
  bool allowed = false;
  Served served = Served::kRemote;
  std::optional<ValueTag> read_tag;
  std::uint32_t resets = 0;
};

struct InvalRecord {
  std::uint64_t seq = 0;   // trace seq of the triggering access
  InvalKind kind = InvalKind::kFull;
  std::uint32_t victim = 0;
  VirtAddr region_base = 0;
  std::uint64_t region_size = 0;
  VirtAddr trigger_page = 0;  // undefined for reset/free cleanse
  bool has_trigger = false;
  std::uint32_t flushed = 0;
  std::uint32_t false_invals = 0;
  std::uint64_t epoch = 0;
};

struct EvictRecord {
  std::uint64_t seq = 0;
  std::uint32_t blade = 0;
  VirtAddr page = 0;
  bool was_dirty = false;
};

struct RunLogs {
  std::vector<AccessRecord> accesses;
  std::vector<InvalRecord> invals;
  std::vector<EvictRecord> evicts;
};

// Page-granular LRU cache of one compute blade. Pages carry the permission
// class they were faulted in with, a dirty bit, and the value tag.
class BladeCache {
 public:
  struct Entry {
    bool dirty = false;
    PermissionClass pc;
    ValueTag tag;
    std::list<VirtAddr>::iterator lru_pos;
  };
  struct Evicted {
    VirtAddr page;
    bool dirty;
    ValueTag tag;
  };

  explicit BladeCache(std::uint64_t capacity_pages) : capacity_(capacity_pages) {}

  Entry* find(VirtAddr page);
  void touch(VirtAddr page);
  // Inserts (or refreshes) a page; returns the LRU victim when full.
  std::optional<Evicted> insert(VirtAddr page, PermissionClass pc, ValueTag tag, bool dirty);
  void remove(VirtAddr page);
  std::vector<VirtAddr> pages_in(VirtAddr lo, VirtAddr hi) const;
  std::uint64_t size() const { return pages_.size(); }
  std::uint64_t capacity() const { return capacity_; }

  // Ordered map so range scans over a region are deterministic.
  std::map<VirtAddr, Entry>& pages() { return pages_; }
  const std::map<VirtAddr, Entry>& pages() const { return pages_; }

 private:
  std::uint64_t capacity_;
  std::map<VirtAddr, Entry> pages_;
  std::list<VirtAddr> lru_;  // front = most recently used
};

// Directory-driven MSI engine over variable-sized regions.
//
// Serialization: callers feed accesses in trace order; that order is the
// switch's serialization order. Latency is a cost layered on top and never
// reorders transitions. Every remote access resolves to a transition from the
// materialized state table; a denied or faulting access performs no
// coherence work at all.
class CoherenceEngine {
 public:
  CoherenceEngine(const AddressSpace& addr, const ProtectionTable& prot, RegionMap& regions,
                  Fabric& fabric, std::uint32_t compute_blades, std::uint64_t cache_pages);

  AccessOutcome access(ComputeBladeId blade, Pdid pdid, VirtAddr va, AccessType type,
                       std::uint64_t seq, double issue_us, std::uint64_t epoch);

  // Capacity eviction entry point (also used internally on cache fill).
  void handle_eviction(ComputeBladeId blade, VirtAddr page, std::uint64_t seq);

  // Tears the covering region's entry down: every blade flushes dirty pages
  // and drops resident ones, the slot is freed. The next access to the area
  // re-instantiates in state I.
  void reset_address(VirtAddr va, std::uint64_t seq, std::uint64_t epoch);

  // Cache/directory cleanse when a vma is freed: cached pages dropped without
  // writeback, memory tags reset, fully-covered entries removed.
  void on_free(const VmaRange& vma, std::uint64_t seq, std::uint64_t epoch);

  ValueTag memory_tag(VirtAddr page) const;
  // Tags as if every dirty page were flushed right now; pages with the
  // initial tag are omitted.
  std::map<VirtAddr, ValueTag> effective_tags() const;

  const BladeCache& cache(ComputeBladeId b) const { return caches_[b.index]; }
  BladeCache& cache(ComputeBladeId b) { return caches_[b.index]; }

  void attach_logs(RunLogs* logs) { logs_ = logs; }
  // Per-epoch false-invalidation accumulator keyed by top-level block index;
  // owned and reset by the epoch driver.
  void attach_block_false(std::map<std::uint64_t, std::uint64_t>* m) { block_false_ = m; }

  std::uint64_t capacity_pressure_events() const { return capacity_pressure_; }
  std::uint64_t forced_resets() const { return forced_resets_; }

 private:
  struct InvalApply {
    std::uint32_t flushed = 0;
    std::uint32_t false_invals = 0;
  };

  // Applies an invalidation's blade-side effect: flush dirty pages in the
  // region (downgrades keep clean read-only copies, everything else drops).
  InvalApply apply_invalidation(ComputeBladeId victim, const DirectoryEntry& region,
                                std::optional<VirtAddr> trigger, InvalKind kind,
                                std::uint64_t seq, std::uint64_t epoch);

  DirectoryEntry* instantiate_with_policy(VirtAddr page, std::uint64_t seq,
                                          std::uint64_t epoch, AccessOutcome& out);
  std::uint32_t do_reset(DirectoryEntry* entry, std::uint64_t seq, std::uint64_t epoch);
  void fill_cache(ComputeBladeId blade, VirtAddr page, AccessType type, std::uint64_t seq,
                  AccessOutcome& out);
  void note_false_invals(const DirectoryEntry& region, std::uint32_t count);

  const AddressSpace& addr_;
  const ProtectionTable& prot_;
  RegionMap& regions_;
  Fabric& fabric_;
  std::uint64_t page_size_;
  std::vector<BladeCache> caches_;
  std::unordered_map<VirtAddr, ValueTag> memory_;
  // Invariant aid: at most one blade may hold a page dirty.
  std::unordered_map<VirtAddr, std::uint32_t> dirty_holder_;
  RunLogs* logs_ = nullptr;
  std::map<std::uint64_t, std::uint64_t>* block_false_ = nullptr;
  std::uint64_t capacity_pressure_ = 0;
  std::uint64_t forced_resets_ = 0;
};

}  // namespace netmmu

#endif  // NETMMU_COHERENCE_HPP_
