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

#ifndef NETMMU_ORACLE_HPP_
#define NETMMU_ORACLE_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "netmmu/sim.hpp"

namespace netmmu {

// Brute-force reference executor. Regions are exactly one page, so there are
// no false invalidations by construction, and every decision (translation,
// permission, value visibility) is recomputed from first principles with a
// flat per-page permission map and a page-granular MSI machine. It reuses the
// address-space module to reproduce allocation placement but shares no
// transition logic with the coherence engine or the split controller.

struct OracleAccess {
  std::uint64_t seq = 0;
  std::uint32_t blade = 0;
  bool is_write = false;
  VirtAddr page = 0;
  bool allowed = false;
  std::optional<ValueTag> read_tag;  // expected value, allowed reads only
};

struct OracleFree {
  std::uint64_t seq = 0;
  VirtAddr base = 0;
  std::uint64_t length = 0;
};

struct OracleResult {
  std::vector<OracleAccess> accesses;  // one per R/W trace event, seq order
  std::vector<OracleFree> frees;       // vma extents torn down, seq order
  std::map<VirtAddr, ValueTag> final_tags;  // last allowed write per live page
};

class OracleReplay {
 public:
  explicit OracleReplay(const SimConfig& cfg);
  ~OracleReplay();

  OracleResult replay(const std::vector<TraceEvent>& trace);

  // Flat-map permission probe for cross-checking the prefix-encoded table.
  bool check(Pdid pdid, VirtAddr va, AccessType type) const;

 private:
  struct PageMsi {
    std::uint8_t state = 0;  // 0 = I, 1 = S, 2 = M
    std::uint32_t sharers = 0;
    std::int32_t owner = -1;
  };

  SimConfig cfg_;
  std::unique_ptr<SwitchBudget> budget_;
  std::unique_ptr<AddressSpace> addr_;
  std::map<Pdid, std::map<VirtAddr, PermissionClass>> perms_;  // page granular
  std::map<VirtAddr, ValueTag> last_write_;
  std::map<VirtAddr, PageMsi> msi_;
  std::map<std::string, VirtAddr> symbols_;
};

// Comparison verdict; empty means the run is indistinguishable from the
// reference. Lines are capped samples, `mismatches` is the full count.
struct DiffReport {
  std::uint64_t mismatches = 0;
  std::vector<std::string> lines;

  bool empty() const { return mismatches == 0; }
  void note(const std::string& line);
  std::string to_string() const;
};

// Replays the simulator's structural logs (invalidation extents, eviction
// points) against the oracle's independent dirty-page bookkeeping and checks:
// per-access allow/deny agreement, read value tags, final effective memory
// tags, per-invalidation flushed / false-invalidation counts (recomputed, the
// simulator's numbers are never trusted), eviction dirty bits, single-writer
// holds at every access, and per-epoch false-invalidation totals against the
// metrics rows.
DiffReport oracle_compare(const OracleResult& oracle, const RunResult& sim);

}  // namespace netmmu

#endif  // NETMMU_ORACLE_HPP_
