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

#include "netmmu/sim.hpp"

#include <algorithm>
#include <limits>

#include "netmmu/error.hpp"
#include "netmmu/util.hpp"

namespace netmmu {

struct Simulator::EpochAccum {
  std::vector<double> latencies;  // allowed accesses only
  std::uint64_t completed = 0;
  std::uint64_t local_hits = 0;
  std::uint64_t remote = 0;
  std::uint64_t denied = 0;
  std::uint64_t faults = 0;
  std::uint64_t invals_sent = 0;
  std::uint64_t pages_flushed = 0;
  std::uint64_t false_invals = 0;
  std::uint64_t resets = 0;

  void reset() { *this = EpochAccum{}; }
};

Simulator::Simulator(const SimConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  budget_ = std::make_unique<SwitchBudget>(cfg_.dir_capacity, cfg_.rule_capacity);
  addr_ = std::make_unique<AddressSpace>(cfg_.page_size, budget_.get());
  for (std::uint32_t b = 0; b < cfg_.memory_blades; ++b) {
    addr_->register_memory_blade(cfg_.blade_capacity);
  }
  prot_ = std::make_unique<ProtectionTable>(cfg_.page_size, budget_.get());
  regions_ = std::make_unique<RegionMap>(cfg_.page_size, cfg_.initial_region, cfg_.top_region,
                                         cfg_.dir_capacity, budget_.get());
  fabric_ = std::make_unique<Fabric>(cfg_.latency, cfg_.reliability, cfg_.seed,
                                     cfg_.compute_blades);
  engine_ = std::make_unique<CoherenceEngine>(*addr_, *prot_, *regions_, *fabric_,
                                              cfg_.compute_blades, cfg_.cache_pages);
  split_ = std::make_unique<SplitController>(*regions_, *addr_, cfg_.c_init, cfg_.merge_factor);
  engine_->attach_block_false(&block_false_);
}

Simulator::~Simulator() = default;

VirtAddr Simulator::resolve(const TraceEvent& ev) const {
  if (ev.symbol.empty()) return ev.addr;
  auto it = symbols_.find(ev.symbol);
  if (it == symbols_.end()) {
    throw SimError(ErrKind::kTrace, "seq " + std::to_string(ev.seq) + ": unbound symbol '$" +
                                        ev.symbol + "'");
  }
  return it->second + ev.offset;
}

void Simulator::handle_alloc(const TraceEvent& ev) {
  VmaRange vma = addr_->alloc_vma(ev.pdid, ev.size);
  prot_->set_permission(ev.pdid, vma, PermissionClass::rw());
  if (!ev.name.empty()) symbols_[ev.name] = vma.base;
}

void Simulator::handle_free(const TraceEvent& ev, std::uint64_t epoch) {
  VirtAddr base = resolve(ev);
  auto vma = addr_->find_vma(base);
  if (!vma) {
    throw SimError(ErrKind::kInvalidFree,
                   "seq " + std::to_string(ev.seq) + ": FREE of unknown vma base");
  }
  // Coherence state first (drops cached pages, clears tags, frees fully
  // covered directory entries), then rights, then the address space.
  engine_->on_free(*vma, ev.seq, epoch);
  prot_->revoke_all(*vma);
  addr_->free_vma(*vma);
}

void Simulator::handle_setperm(const TraceEvent& ev) {
  VirtAddr base = resolve(ev);
  VmaRange extent;
  if (ev.size != 0) {
    extent = VmaRange{base, ev.size, ev.pdid};
  } else {
    // Whole containing vma.
    const auto& vmas = addr_->live_vmas();
    auto it = vmas.upper_bound(base);
    if (it == vmas.begin() || !std::prev(it)->second.contains(base)) {
      throw SimError(ErrKind::kTrace, "seq " + std::to_string(ev.seq) +
                                          ": SETPERM outside any live vma");
    }
    extent = std::prev(it)->second;
    extent.pdid = ev.pdid;
  }
  if (ev.none_perm) {
    prot_->revoke(ev.pdid, extent);
  } else {
    prot_->set_permission(ev.pdid, extent, ev.pc);
  }
}

void Simulator::emit_epoch(RunResult& res, EpochAccum& acc, std::uint64_t epoch, bool resize,
                           double elapsed_us) {
  MetricsRow row;
  row.epoch = epoch;
  row.false_invals = acc.false_invals;
  row.remote_accesses = acc.remote;
  row.invals_sent = acc.invals_sent;
  row.pages_flushed = acc.pages_flushed;
  row.local_hits = acc.local_hits;
  row.denied = acc.denied;
  row.faults = acc.faults;
  row.resets = acc.resets;

  LatencyStats st = latency_stats(acc.latencies);
  row.mean_us = st.mean_us;
  row.median_us = st.median_us;
  row.p99_us = st.p99_us;
  row.iops = elapsed_us > 0.0
                 ? static_cast<double>(acc.completed) / (elapsed_us * 1e-6)
                 : 0.0;

  if (resize) {
    EpochReport rep = split_->end_epoch(epoch, block_false_);
    row.splits = rep.splits;
    row.merges = rep.merges;
    row.deferred_splits = rep.deferred_splits;
    row.c = rep.c_after;
    row.threshold = rep.threshold;
    res.totals.splits += rep.splits;
    res.totals.merges += rep.merges;
  } else {
    // Final partial epoch: the timer never fired, so no resize decision.
    row.c = split_->c();
    row.threshold = std::numeric_limits<double>::infinity();
  }
  row.live_regions = regions_->live_count();
  row.rule_util = budget_->rule_utilization();
  row.slot_util = budget_->directory_utilization();
  res.rows.push_back(row);
  acc.reset();
}

RunResult Simulator::run(const std::vector<TraceEvent>& trace) {
  RunResult res;
  engine_->attach_logs(&res.logs);

  std::vector<double> blade_clock(cfg_.compute_blades, 0.0);
  double now = 0.0;  // monotone issue-time envelope
  std::uint64_t epoch_idx = 0;
  EpochAccum acc;
  bool any = false;

  for (const TraceEvent& ev : trace) {
    if (ev.blade >= cfg_.compute_blades) {
      throw SimError(ErrKind::kTrace, "seq " + std::to_string(ev.seq) +
                                          ": blade index out of range");
    }
    any = true;
    ++res.totals.events;
    double issue = blade_clock[ev.blade];
    now = std::max(now, issue);
    while (now >= static_cast<double>(epoch_idx + 1) * cfg_.epoch_us()) {
      emit_epoch(res, acc, epoch_idx, true, cfg_.epoch_us());
      ++epoch_idx;
    }

    switch (ev.op) {
      case OpKind::kAlloc:
        handle_alloc(ev);
        ++res.totals.allocs;
        break;
      case OpKind::kFree:
        handle_free(ev, epoch_idx);
        ++res.totals.frees;
        break;
      case OpKind::kSetPerm:
        handle_setperm(ev);
        ++res.totals.setperms;
        break;
      case OpKind::kRead:
      case OpKind::kWrite: {
        AccessType type = ev.op == OpKind::kRead ? AccessType::kRead : AccessType::kWrite;
        VirtAddr va = resolve(ev);
        AccessOutcome out = engine_->access(ComputeBladeId{ev.blade}, ev.pdid, va, type,
                                            ev.seq, issue, epoch_idx);
        blade_clock[ev.blade] = issue + out.latency_us;
        res.logs.accesses.push_back(AccessRecord{
            ev.seq, ev.blade, ev.pdid, type, align_down(va, cfg_.page_size),
            out.served == Served::kLocal || out.served == Served::kRemote, out.served,
            out.read_tag, out.resets});
        ++res.totals.accesses;
        if (type == AccessType::kRead) {
          ++res.totals.reads;
        } else {
          ++res.totals.writes;
        }
        switch (out.served) {
          case Served::kLocal:
            ++acc.local_hits;
            ++acc.completed;
            ++res.totals.local_hits;
            acc.latencies.push_back(out.latency_us);
            break;
          case Served::kRemote:
            ++acc.remote;
            ++acc.completed;
            ++res.totals.remote;
            acc.latencies.push_back(out.latency_us);
            break;
          case Served::kDenied:
            ++acc.denied;
            ++res.totals.denied;
            break;
          case Served::kFault:
            ++acc.faults;
            ++res.totals.faults;
            break;
        }
        acc.invals_sent += out.invalidations_sent;
        acc.pages_flushed += out.pages_flushed;
        acc.false_invals += out.false_invalidations;
        acc.resets += out.resets;
        res.totals.invals_sent += out.invalidations_sent;
        res.totals.pages_flushed += out.pages_flushed;
        res.totals.false_invals += out.false_invalidations;
        res.totals.evictions += out.evictions;
        res.totals.resets += out.resets;
        break;
      }
    }
  }

  double end_time = now;
  for (double t : blade_clock) end_time = std::max(end_time, t);
  res.totals.sim_time_us = end_time;
  // The tail row covers the in-progress epoch; a run whose tail saw only
  // zero-time control-plane events has nothing to report there.
  bool tail_active = acc.completed + acc.denied + acc.faults > 0;
  if (any && tail_active) {
    double start = static_cast<double>(epoch_idx) * cfg_.epoch_us();
    emit_epoch(res, acc, epoch_idx, false, std::max(0.0, end_time - start));
  }

  res.final_tags = engine_->effective_tags();
  res.symbols = symbols_;
  res.fairness = addr_->fairness_index();
  res.retransmissions = fabric_->retransmissions();
  res.messages_sent = fabric_->messages_sent_total();
  res.capacity_pressure_events =
      split_->capacity_pressure_events() + engine_->capacity_pressure_events();
  res.forced_resets = engine_->forced_resets();

  Fnv1a digest;
  for (const auto& [page, tag] : res.final_tags) {
    digest.add(page);
    digest.add(tag.writer);
    digest.add(tag.seq);
  }
  for (const auto& [base, e] : regions_->regions()) {
    digest.add(base);
    digest.add(e.size);
    digest.add(static_cast<std::uint64_t>(e.state));
    digest.add(e.sharers);
  }
  for (const auto& [base, vma] : addr_->live_vmas()) {
    digest.add(base);
    digest.add(vma.length);
  }
  res.state_digest = digest.value();
  res.exit_code = res.capacity_pressure_events > 0 ? 2 : 0;
  return res;
}

RunResult run_trace(const SimConfig& cfg, const std::vector<TraceEvent>& trace) {
  Simulator sim(cfg);
  return sim.run(trace);
}

}  // namespace netmmu
