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

#include "netmmu/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace netmmu {

namespace {

// Fixed text form for doubles so reruns are byte-identical: shortest
// round-trip formatting is locale-free and stable for IEEE doubles.
void put(std::ostream& out, double v) {
  if (std::isinf(v)) {
    out << (v > 0 ? "inf" : "-inf");
    return;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  out << buf;
}

}  // namespace

LatencyStats latency_stats(std::vector<double>& samples) {
  LatencyStats st;
  if (samples.empty()) return st;
  std::sort(samples.begin(), samples.end());
  double sum = 0.0;
  for (double v : samples) sum += v;
  st.mean_us = sum / static_cast<double>(samples.size());
  auto rank = [&](double q) {
    std::size_t r = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(samples.size())));
    if (r == 0) r = 1;
    return samples[r - 1];
  };
  st.median_us = rank(0.50);
  st.p99_us = rank(0.99);
  return st;
}

void write_metrics_header(std::ostream& out) {
  out << "epoch,live_regions,splits,merges,c,t,false_invals,remote_accesses,"
         "invals_sent,pages_flushed,mean_us,median_us,p99_us,iops,rule_util,"
         "slot_util,local_hits,denied,faults,resets,deferred_splits\n";
}

void write_metrics_row(std::ostream& out, const MetricsRow& r) {
  out << r.epoch << ',' << r.live_regions << ',' << r.splits << ',' << r.merges << ',';
  put(out, r.c);
  out << ',';
  put(out, r.threshold);
  out << ',' << r.false_invals << ',' << r.remote_accesses << ',' << r.invals_sent << ','
      << r.pages_flushed << ',';
  put(out, r.mean_us);
  out << ',';
  put(out, r.median_us);
  out << ',';
  put(out, r.p99_us);
  out << ',';
  put(out, r.iops);
  out << ',';
  put(out, r.rule_util);
  out << ',';
  put(out, r.slot_util);
  out << ',' << r.local_hits << ',' << r.denied << ',' << r.faults << ',' << r.resets << ','
      << r.deferred_splits << '\n';
}

}  // namespace netmmu
