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

#ifndef NETMMU_SPLITCTL_HPP_
#define NETMMU_SPLITCTL_HPP_

#include <cstdint>
#include <map>

#include "netmmu/addrspace.hpp"
#include "netmmu/directory.hpp"

namespace netmmu {

// Threshold over an epoch's false-invalidation totals: sum / (c * N), where N
// counts the top-level blocks overlapping allocated space. A quiet epoch
// (zero sum) yields +infinity: no region can exceed it, so nothing splits,
// and merges are skipped too because the merge rule is relative to the same
// threshold and a quiet epoch carries no sizing signal.
double compute_threshold(std::uint64_t sum_false, double c, std::uint64_t top_blocks);

// Worst-case live sub-regions of one top-level block under the threshold:
// 1 when f <= t, otherwise (ceil(f/t) - 1) * (1 + log2(m_pages)).
std::uint64_t worst_case_subregions(std::uint64_t f, double t, std::uint64_t m_pages);

// Never-exceeded live-region ceiling across the space: c * N * (1 + log2 M).
double global_bound(double c, std::uint64_t top_blocks, std::uint64_t m_pages);

struct EpochReport {
  std::uint64_t epoch = 0;
  std::uint64_t top_blocks = 0;   // N at this boundary
  std::uint64_t sum_false = 0;    // false invalidations across the epoch
  double threshold = 0.0;         // +inf on quiet epochs
  std::uint32_t splits = 0;
  std::uint32_t merges = 0;
  std::uint32_t deferred_splits = 0;  // split mandated, no slot free
  double c_after = 0.0;
  std::uint64_t live_regions = 0;     // after resizing
  double utilization = 0.0;           // directory slots, after resizing
};

// Epoch-boundary controller for region resizing. Splits every region whose
// per-epoch false-invalidation count strictly exceeds the threshold (one
// level per epoch; children start fresh), merges buddy pairs that are both
// quiet and coherence-identical, then adjusts c so that directory utilization
// trends below the cap. Runs inline at epoch boundaries; the access path
// never resizes.
class SplitController {
 public:
  SplitController(RegionMap& regions, const AddressSpace& addr, double c_init,
                  double merge_factor);

  // Consumes and clears both per-epoch accumulators: the per-block map fed by
  // the coherence engine and the per-region counters on directory entries.
  EpochReport end_epoch(std::uint64_t epoch, std::map<std::uint64_t, std::uint64_t>& block_false);

  double c() const { return c_; }
  double merge_factor() const { return merge_factor_; }
  std::uint64_t capacity_pressure_events() const { return capacity_pressure_; }

 private:
  RegionMap& regions_;
  const AddressSpace& addr_;
  double c_;
  double merge_factor_;
  std::uint64_t capacity_pressure_ = 0;
};

}  // namespace netmmu

#endif  // NETMMU_SPLITCTL_HPP_
