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

#include "netmmu/oracle.hpp"

#include <algorithm>
#include <sstream>

#include "netmmu/error.hpp"
#include "netmmu/util.hpp"

namespace netmmu {

namespace {
constexpr std::size_t kMaxDiffLines = 25;

std::string tag_str(const ValueTag& t) {
  std::ostringstream os;
  os << "{w" << t.writer << ",s" << t.seq << "}";
  return os.str();
}

std::string opt_tag_str(const std::optional<ValueTag>& t) {
  return t ? tag_str(*t) : std::string("none");
}
}  // namespace

void DiffReport::note(const std::string& line) {
  ++mismatches;
  if (lines.size() < kMaxDiffLines) lines.push_back(line);
}

std::string DiffReport::to_string() const {
  std::ostringstream os;
  for (const std::string& l : lines) os << l << '\n';
  if (mismatches > lines.size()) {
    os << "... and " << (mismatches - lines.size()) << " more\n";
  }
  return os.str();
}

OracleReplay::OracleReplay(const SimConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  budget_ = std::make_unique<SwitchBudget>(cfg_.dir_capacity, cfg_.rule_capacity);
  addr_ = std::make_unique<AddressSpace>(cfg_.page_size, budget_.get());
  for (std::uint32_t b = 0; b < cfg_.memory_blades; ++b) {
    addr_->register_memory_blade(cfg_.blade_capacity);
  }
}

OracleReplay::~OracleReplay() = default;

bool OracleReplay::check(Pdid pdid, VirtAddr va, AccessType type) const {
  auto t = perms_.find(pdid);
  if (t == perms_.end()) return false;
  auto p = t->second.find(align_down(va, cfg_.page_size));
  return p != t->second.end() && p->second.admits(type);
}

OracleResult OracleReplay::replay(const std::vector<TraceEvent>& trace) {
  OracleResult res;

  auto resolve = [&](const TraceEvent& ev) -> VirtAddr {
    if (ev.symbol.empty()) return ev.addr;
    auto it = symbols_.find(ev.symbol);
    if (it == symbols_.end()) {
      throw SimError(ErrKind::kTrace, "seq " + std::to_string(ev.seq) + ": unbound symbol '$" +
                                          ev.symbol + "'");
    }
    return it->second + ev.offset;
  };

  for (const TraceEvent& ev : trace) {
    switch (ev.op) {
      case OpKind::kAlloc: {
        VmaRange vma = addr_->alloc_vma(ev.pdid, ev.size);
        auto& m = perms_[ev.pdid];
        for (VirtAddr p = vma.base; p < vma.end(); p += cfg_.page_size) {
          m[p] = PermissionClass::rw();
        }
        if (!ev.name.empty()) symbols_[ev.name] = vma.base;
        break;
      }
      case OpKind::kFree: {
        VirtAddr base = resolve(ev);
        auto vma = addr_->find_vma(base);
        if (!vma) {
          throw SimError(ErrKind::kInvalidFree,
                         "seq " + std::to_string(ev.seq) + ": FREE of unknown vma base");
        }
        res.frees.push_back(OracleFree{ev.seq, vma->base, vma->length});
        for (auto& [pdid, m] : perms_) {
          m.erase(m.lower_bound(vma->base), m.lower_bound(vma->end()));
        }
        last_write_.erase(last_write_.lower_bound(vma->base),
                          last_write_.lower_bound(vma->end()));
        msi_.erase(msi_.lower_bound(vma->base), msi_.lower_bound(vma->end()));
        addr_->free_vma(*vma);
        break;
      }
      case OpKind::kSetPerm: {
        VirtAddr base = resolve(ev);
        VirtAddr lo, hi;
        if (ev.size != 0) {
          lo = align_down(base, cfg_.page_size);
          hi = align_up(base + ev.size, cfg_.page_size);
        } else {
          const auto& vmas = addr_->live_vmas();
          auto it = vmas.upper_bound(base);
          if (it == vmas.begin() || !std::prev(it)->second.contains(base)) {
            throw SimError(ErrKind::kTrace, "seq " + std::to_string(ev.seq) +
                                                ": SETPERM outside any live vma");
          }
          lo = std::prev(it)->second.base;
          hi = std::prev(it)->second.end();
        }
        auto& m = perms_[ev.pdid];
        if (ev.none_perm) {
          m.erase(m.lower_bound(lo), m.lower_bound(hi));
        } else {
          for (VirtAddr p = lo; p < hi; p += cfg_.page_size) m[p] = ev.pc;
        }
        break;
      }
      case OpKind::kRead:
      case OpKind::kWrite: {
        VirtAddr va = resolve(ev);
        VirtAddr page = align_down(va, cfg_.page_size);
        AccessType type = ev.op == OpKind::kWrite ? AccessType::kWrite : AccessType::kRead;

        OracleAccess rec;
        rec.seq = ev.seq;
        rec.blade = ev.blade;
        rec.is_write = type == AccessType::kWrite;
        rec.page = page;
        rec.allowed = addr_->try_translate(va).has_value() && check(ev.pdid, va, type);
        if (rec.allowed) {
          PageMsi& pm = msi_[page];
          if (type == AccessType::kWrite) {
            pm.state = 2;
            pm.sharers = 1u << ev.blade;
            pm.owner = static_cast<std::int32_t>(ev.blade);
            last_write_[page] = ValueTag{tag_writer(ComputeBladeId{ev.blade}), ev.seq};
          } else {
            auto w = last_write_.find(page);
            rec.read_tag = w == last_write_.end() ? ValueTag{} : w->second;
            if (pm.state == 2 && pm.owner != static_cast<std::int32_t>(ev.blade)) {
              pm.state = 1;  // downgraded; old owner keeps a clean copy
              pm.owner = -1;
            } else if (pm.state == 0) {
              pm.state = 1;
              pm.sharers = 0;
            }
            pm.sharers |= 1u << ev.blade;
          }
        }
        res.accesses.push_back(std::move(rec));
        break;
      }
    }
  }
  res.final_tags = last_write_;
  return res;
}

DiffReport oracle_compare(const OracleResult& oracle, const RunResult& sim) {
  DiffReport diff;

  // Per-access decisions and read value tags.
  if (oracle.accesses.size() != sim.logs.accesses.size()) {
    diff.note("access log size mismatch: sim " + std::to_string(sim.logs.accesses.size()) +
              " vs oracle " + std::to_string(oracle.accesses.size()));
    return diff;
  }
  for (std::size_t i = 0; i < oracle.accesses.size(); ++i) {
    const OracleAccess& o = oracle.accesses[i];
    const AccessRecord& s = sim.logs.accesses[i];
    if (o.seq != s.seq || o.blade != s.blade ||
        o.is_write != (s.type == AccessType::kWrite)) {
      diff.note("seq " + std::to_string(o.seq) + ": access stream diverged");
      return diff;
    }
    if (o.page != s.page) {
      diff.note("seq " + std::to_string(o.seq) + ": page 0x" /* allocator divergence */ +
                [&] { std::ostringstream os; os << std::hex << s.page << " vs oracle 0x"
                                                << o.page; return os.str(); }());
      continue;
    }
    if (o.allowed != s.allowed) {
      diff.note("seq " + std::to_string(o.seq) + ": sim " +
                (s.allowed ? "allowed" : "denied") + ", oracle says " +
                (o.allowed ? "allowed" : "denied"));
      continue;
    }
    if (o.allowed && !o.is_write) {
      if (!s.read_tag || !(*s.read_tag == *o.read_tag)) {
        diff.note("seq " + std::to_string(o.seq) + ": read tag " + opt_tag_str(s.read_tag) +
                  ", expected " + opt_tag_str(o.read_tag));
      }
    }
  }

  // Final effective memory tags.
  {
    auto si = sim.final_tags.begin();
    auto oi = oracle.final_tags.begin();
    while (si != sim.final_tags.end() || oi != oracle.final_tags.end()) {
      if (oi == oracle.final_tags.end() ||
          (si != sim.final_tags.end() && si->first < oi->first)) {
        std::ostringstream os;
        os << "final tag: sim has extra page 0x" << std::hex << si->first;
        diff.note(os.str());
        ++si;
      } else if (si == sim.final_tags.end() || oi->first < si->first) {
        std::ostringstream os;
        os << "final tag: sim missing page 0x" << std::hex << oi->first;
        diff.note(os.str());
        ++oi;
      } else {
        if (!(si->second == oi->second)) {
          std::ostringstream os;
          os << "final tag: page 0x" << std::hex << si->first << std::dec << " sim "
             << tag_str(si->second) << " expected " << tag_str(oi->second);
          diff.note(os.str());
        }
        ++si;
        ++oi;
      }
    }
  }

  // Census replay: the simulator's structural logs (invalidation extents and
  // eviction points) against independent dirty-page bookkeeping. Intra-seq
  // order is invalidations, then the access/free itself, then its evictions.
  std::uint32_t blades = 0;
  for (const OracleAccess& a : oracle.accesses) blades = std::max(blades, a.blade + 1);
  for (const InvalRecord& r : sim.logs.invals) blades = std::max(blades, r.victim + 1);
  for (const EvictRecord& r : sim.logs.evicts) blades = std::max(blades, r.blade + 1);
  std::vector<std::set<VirtAddr>> dirty(blades);
  std::map<std::uint64_t, std::uint64_t> epoch_expected;
  std::map<std::uint64_t, std::uint64_t> epoch_reported;
  std::uint64_t total_expected_false = 0;

  std::size_t ii = 0, ia = 0, ifr = 0, ie = 0;
  auto next_key = [&](bool& have, std::uint64_t& seq, int& phase) {
    have = false;
    seq = 0;
    phase = 3;
    auto consider = [&](std::uint64_t s, int p) {
      if (!have || s < seq || (s == seq && p < phase)) {
        have = true;
        seq = s;
        phase = p;
      }
    };
    if (ii < sim.logs.invals.size()) consider(sim.logs.invals[ii].seq, 0);
    if (ia < oracle.accesses.size()) consider(oracle.accesses[ia].seq, 1);
    if (ifr < oracle.frees.size()) consider(oracle.frees[ifr].seq, 1);
    if (ie < sim.logs.evicts.size()) consider(sim.logs.evicts[ie].seq, 2);
  };

  for (;;) {
    bool have;
    std::uint64_t seq;
    int phase;
    next_key(have, seq, phase);
    if (!have) break;

    if (phase == 0) {
      const InvalRecord& r = sim.logs.invals[ii++];
      auto& dset = dirty[r.victim];
      std::vector<VirtAddr> hit;
      for (auto it = dset.lower_bound(r.region_base);
           it != dset.end() && *it < r.region_base + r.region_size; ++it) {
        hit.push_back(*it);
      }
      auto expected_flushed = static_cast<std::uint32_t>(hit.size());
      bool trigger_dirty =
          r.has_trigger && std::binary_search(hit.begin(), hit.end(), r.trigger_page);
      std::uint32_t expected_false = 0;
      if (r.kind == InvalKind::kFull || r.kind == InvalKind::kDowngrade) {
        expected_false = expected_flushed - (trigger_dirty ? 1u : 0u);
      }
      if (r.flushed != expected_flushed) {
        std::ostringstream os;
        os << "seq " << r.seq << ": invalidation of [0x" << std::hex << r.region_base
           << ", +0x" << r.region_size << std::dec << ") at blade " << r.victim
           << " flushed " << r.flushed << ", census says " << expected_flushed;
        diff.note(os.str());
      }
      if (r.false_invals != expected_false) {
        std::ostringstream os;
        os << "seq " << r.seq << ": false invalidations " << r.false_invals
           << ", census says " << expected_false << " (blade " << r.victim << ")";
        diff.note(os.str());
      }
      epoch_expected[r.epoch] += expected_false;
      epoch_reported[r.epoch] += r.false_invals;
      total_expected_false += expected_false;
      for (VirtAddr p : hit) dset.erase(p);
    } else if (phase == 1 && ia < oracle.accesses.size() &&
               oracle.accesses[ia].seq == seq) {
      const OracleAccess& a = oracle.accesses[ia++];
      if (!a.allowed) continue;
      for (std::uint32_t b = 0; b < blades; ++b) {
        if (b != a.blade && dirty[b].count(a.page)) {
          std::ostringstream os;
          os << "seq " << a.seq << ": page 0x" << std::hex << a.page << std::dec
             << " still dirty at blade " << b << " during access by blade " << a.blade
             << " (missed flush)";
          diff.note(os.str());
        }
      }
      if (a.is_write) dirty[a.blade].insert(a.page);
    } else if (phase == 1) {
      const OracleFree& f = oracle.frees[ifr++];
      for (auto& dset : dirty) {
        dset.erase(dset.lower_bound(f.base), dset.lower_bound(f.base + f.length));
      }
    } else {
      const EvictRecord& r = sim.logs.evicts[ie++];
      bool expected_dirty = dirty[r.blade].count(r.page) != 0;
      if (r.was_dirty != expected_dirty) {
        std::ostringstream os;
        os << "seq " << r.seq << ": eviction of page 0x" << std::hex << r.page << std::dec
           << " at blade " << r.blade << " dirty=" << r.was_dirty << ", census says "
           << expected_dirty;
        diff.note(os.str());
      }
      dirty[r.blade].erase(r.page);
    }
  }

  // Per-epoch totals in the metrics rows must equal the census recount.
  std::map<std::uint64_t, std::uint64_t> row_false;
  for (const MetricsRow& row : sim.rows) row_false[row.epoch] += row.false_invals;
  for (const auto& [epoch, expected] : epoch_expected) {
    auto it = row_false.find(epoch);
    std::uint64_t reported = it == row_false.end() ? 0 : it->second;
    if (reported != expected) {
      diff.note("epoch " + std::to_string(epoch) + ": row reports " +
                std::to_string(reported) + " false invalidations, census says " +
                std::to_string(expected));
    }
  }
  for (const auto& [epoch, reported] : row_false) {
    if (reported != 0 && epoch_expected.find(epoch) == epoch_expected.end()) {
      diff.note("epoch " + std::to_string(epoch) + ": row reports " +
                std::to_string(reported) + " false invalidations, census says 0");
    }
  }
  if (sim.totals.false_invals != total_expected_false) {
    diff.note("total false invalidations: sim " + std::to_string(sim.totals.false_invals) +
              ", census " + std::to_string(total_expected_false));
  }

  return diff;
}

}  // namespace netmmu
