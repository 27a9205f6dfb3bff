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

#include "netmmu/sweeps.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "netmmu/sim.hpp"

namespace netmmu {

namespace {
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}
}  // namespace

std::string sweep_throughput_grid(const SimConfig& base, const GeneratorSpec& gen,
                                  const std::vector<double>& read_ratios,
                                  const std::vector<double>& sharing_ratios) {
  std::ostringstream out;
  out << "read_ratio,sharing_ratio,iops,mean_us,remote_accesses,invals_sent,false_invals\n";
  for (double rr : read_ratios) {
    for (double sr : sharing_ratios) {
      GeneratorSpec cell = gen;
      cell.read_ratio = rr;
      cell.sharing_ratio = sr;
      RunResult res = run_trace(base, generate_trace(cell, base.page_size));
      std::uint64_t completed = res.totals.local_hits + res.totals.remote;
      double iops = res.totals.sim_time_us > 0.0
                        ? static_cast<double>(completed) / (res.totals.sim_time_us * 1e-6)
                        : 0.0;
      // Whole-run mean latency from the per-epoch rows, weighted by row size.
      double weighted = 0.0;
      std::uint64_t n = 0;
      for (const MetricsRow& row : res.rows) {
        std::uint64_t row_n = row.local_hits + row.remote_accesses;
        weighted += row.mean_us * static_cast<double>(row_n);
        n += row_n;
      }
      double mean_us = n > 0 ? weighted / static_cast<double>(n) : 0.0;
      out << fmt(rr) << ',' << fmt(sr) << ',' << fmt(iops) << ',' << fmt(mean_us) << ','
          << res.totals.remote << ',' << res.totals.invals_sent << ','
          << res.totals.false_invals << '\n';
    }
  }
  return out.str();
}

std::string sweep_splitting_tradeoff(const SimConfig& base, const GeneratorSpec& gen,
                                     const std::vector<std::uint64_t>& initial_sizes,
                                     const std::vector<double>& epoch_lengths_ms) {
  std::ostringstream out;
  out << "initial_region,epoch_ms,final_regions,peak_regions,false_invals,splits,merges\n";
  std::vector<TraceEvent> trace = generate_trace(gen, base.page_size);
  for (std::uint64_t init : initial_sizes) {
    for (double ems : epoch_lengths_ms) {
      SimConfig cfg = base;
      cfg.initial_region = init;
      cfg.epoch_ms = ems;
      RunResult res = run_trace(cfg, trace);
      std::uint64_t peak = 0;
      for (const MetricsRow& row : res.rows) peak = std::max(peak, row.live_regions);
      std::uint64_t final_regions = res.rows.empty() ? 0 : res.rows.back().live_regions;
      out << init << ',' << fmt(ems) << ',' << final_regions << ',' << peak << ','
          << res.totals.false_invals << ',' << res.totals.splits << ','
          << res.totals.merges << '\n';
    }
  }
  return out.str();
}

}  // namespace netmmu
