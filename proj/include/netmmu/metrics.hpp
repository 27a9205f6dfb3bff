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

#ifndef NETMMU_METRICS_HPP_
#define NETMMU_METRICS_HPP_

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace netmmu {

// One per-epoch metrics row. Column order in the CSV is the field order here
// and is part of the output contract (documented in the README).
struct MetricsRow {
  std::uint64_t epoch = 0;
  std::uint64_t live_regions = 0;
  std::uint32_t splits = 0;
  std::uint32_t merges = 0;
  double c = 0.0;
  double threshold = 0.0;  // +inf written as "inf"
  std::uint64_t false_invals = 0;
  std::uint64_t remote_accesses = 0;
  std::uint64_t invals_sent = 0;
  std::uint64_t pages_flushed = 0;
  double mean_us = 0.0;
  double median_us = 0.0;
  double p99_us = 0.0;
  double iops = 0.0;  // completed accesses / simulated epoch seconds
  double rule_util = 0.0;
  double slot_util = 0.0;
  std::uint64_t local_hits = 0;
  std::uint64_t denied = 0;
  std::uint64_t faults = 0;
  std::uint64_t resets = 0;
  std::uint32_t deferred_splits = 0;
};

// Latency percentiles over one epoch's access latencies (nearest-rank).
// Empty input yields all zeros.
struct LatencyStats {
  double mean_us = 0.0;
  double median_us = 0.0;
  double p99_us = 0.0;
};
LatencyStats latency_stats(std::vector<double>& samples);  // sorts in place

void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const MetricsRow& row);

}  // namespace netmmu

#endif  // NETMMU_METRICS_HPP_
