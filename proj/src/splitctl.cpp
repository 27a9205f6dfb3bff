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

#include "netmmu/splitctl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace netmmu {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// Utilization band for the c law: raise c (split less) when the directory is
// nearly full, relax it when the directory is mostly idle.
constexpr double kUtilHigh = 0.90;
constexpr double kUtilLow = 0.50;
constexpr double kRaise = 1.5;
constexpr double kRelax = 1.25;
}  // namespace

double compute_threshold(std::uint64_t sum_false, double c, std::uint64_t top_blocks) {
  if (sum_false == 0 || top_blocks == 0) return kInf;
  return static_cast<double>(sum_false) / (c * static_cast<double>(top_blocks));
}

std::uint64_t worst_case_subregions(std::uint64_t f, double t, std::uint64_t m_pages) {
  if (std::isinf(t) || static_cast<double>(f) <= t) return 1;
  auto laps = static_cast<std::uint64_t>(std::ceil(static_cast<double>(f) / t));
  std::uint64_t depth = 1 + log2_exact(ceil_pow2(m_pages));
  return (laps - 1) * depth;
}

double global_bound(double c, std::uint64_t top_blocks, std::uint64_t m_pages) {
  std::uint64_t depth = 1 + log2_exact(ceil_pow2(m_pages));
  return c * static_cast<double>(top_blocks) * static_cast<double>(depth);
}

SplitController::SplitController(RegionMap& regions, const AddressSpace& addr, double c_init,
                                 double merge_factor)
    : regions_(regions), addr_(addr), c_(c_init), merge_factor_(merge_factor) {
  if (c_init <= 0.0) throw SimError(ErrKind::kConfig, "c must be positive");
  if (merge_factor < 0.0) throw SimError(ErrKind::kConfig, "merge factor must be nonnegative");
}

EpochReport SplitController::end_epoch(std::uint64_t epoch,
                                       std::map<std::uint64_t, std::uint64_t>& block_false) {
  EpochReport rep;
  rep.epoch = epoch;
  rep.top_blocks = addr_.allocated_block_set(regions_.top_size()).size();
  for (const auto& [block, count] : block_false) rep.sum_false += count;
  rep.threshold = compute_threshold(rep.sum_false, c_, rep.top_blocks);

  if (!std::isinf(rep.threshold)) {
    // Both candidate sets come from one pre-resize snapshot: children created
    // by this boundary's splits start with zero counters and inherited state,
    // so letting the merge scan see them would undo every split on the spot.
    std::vector<VirtAddr> hot;
    std::vector<std::pair<VirtAddr, std::uint64_t>> cold;  // left buddy base, size
    double quiet = merge_factor_ * rep.threshold;
    for (const auto& [base, e] : regions_.regions()) {
      if (static_cast<double>(e.false_invals_epoch) > rep.threshold &&
          e.size > regions_.page_size()) {
        hot.push_back(base);
        continue;
      }
      if (base % (2 * e.size) != 0) continue;       // not a left buddy
      if (2 * e.size > regions_.top_size()) continue;
      auto it = regions_.regions().find(base + e.size);
      if (it == regions_.regions().end()) continue;
      const DirectoryEntry& r = it->second;
      if (r.size != e.size) continue;
      if (r.state != e.state || r.sharers != e.sharers || r.owner != e.owner) continue;
      if (static_cast<double>(e.false_invals_epoch + r.false_invals_epoch) > quiet) continue;
      cold.emplace_back(base, e.size);
    }

    for (VirtAddr base : hot) {
      DirectoryEntry* e = regions_.find_covering(base);
      if (regions_.split(e)) {
        ++rep.splits;
      } else {
        ++rep.deferred_splits;
        ++capacity_pressure_;
      }
    }

    // Buddy pairs are disjoint, so each merge applies at most once and never
    // cascades within the epoch. A pair member resized by the split pass
    // (possible only with merge factors above 1) drops out here.
    for (auto [base, size] : cold) {
      DirectoryEntry* left = regions_.find_covering(base);
      if (left == nullptr || left->base != base || left->size != size) continue;
      auto it = regions_.regions().find(base + size);
      if (it == regions_.regions().end() || it->second.size != size) continue;
      regions_.merge(left, &it->second);
      ++rep.merges;
    }
  }

  double util = regions_.slots().utilization();
  if (util >= kUtilHigh) {
    c_ *= kRaise;
  } else if (util < kUtilLow) {
    c_ = std::max(1.0, c_ / kRelax);
  }

  for (auto& [base, e] : regions_.regions()) e.false_invals_epoch = 0;
  block_false.clear();

  rep.c_after = c_;
  rep.live_regions = regions_.live_count();
  rep.utilization = regions_.slots().utilization();
  return rep;
}

}  // namespace netmmu
