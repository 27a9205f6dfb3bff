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

#ifndef NETMMU_SIM_HPP_
#define NETMMU_SIM_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "netmmu/coherence.hpp"
#include "netmmu/config.hpp"
#include "netmmu/metrics.hpp"
#include "netmmu/splitctl.hpp"
#include "netmmu/trace.hpp"

namespace netmmu {

struct RunTotals {
  std::uint64_t events = 0;
  std::uint64_t accesses = 0;  // R/W events
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t local_hits = 0;
  std::uint64_t remote = 0;
  std::uint64_t denied = 0;
  std::uint64_t faults = 0;
  std::uint64_t invals_sent = 0;
  std::uint64_t pages_flushed = 0;
  std::uint64_t false_invals = 0;
  std::uint64_t evictions = 0;
  std::uint64_t resets = 0;
  std::uint64_t splits = 0;
  std::uint64_t merges = 0;
  std::uint64_t allocs = 0;
  std::uint64_t frees = 0;
  std::uint64_t setperms = 0;
  double sim_time_us = 0.0;  // completion envelope across blades
};

struct RunResult {
  std::vector<MetricsRow> rows;
  RunTotals totals;
  RunLogs logs;  // structural logs consumed by the oracle comparison
  std::map<VirtAddr, ValueTag> final_tags;  // effective (as-if-flushed) tags
  std::map<std::string, VirtAddr> symbols;  // final symbol bindings
  double fairness = 1.0;
  std::uint64_t retransmissions = 0;
  std::uint64_t messages_sent = 0;
  std::uint64_t capacity_pressure_events = 0;
  std::uint64_t forced_resets = 0;
  std::uint64_t state_digest = 0;
  int exit_code = 0;  // 0 clean, 2 completed under capacity pressure
};

// Owns one run's module stack and drives the event loop: blades execute
// closed-loop (one outstanding access each), the trace order is the switch
// serialization order, and the epoch timer runs on the monotone envelope of
// issue times. ALLOC/FREE/SETPERM are control-plane events and consume no
// simulated time.
class Simulator {
 public:
  explicit Simulator(const SimConfig& cfg);
  ~Simulator();

  RunResult run(const std::vector<TraceEvent>& trace);

  const AddressSpace& addr() const { return *addr_; }
  const ProtectionTable& prot() const { return *prot_; }
  const RegionMap& regions() const { return *regions_; }
  const CoherenceEngine& engine() const { return *engine_; }
  const SplitController& splitter() const { return *split_; }
  const Fabric& fabric() const { return *fabric_; }
  const SwitchBudget& budget() const { return *budget_; }

 private:
  struct EpochAccum;

  VirtAddr resolve(const TraceEvent& ev) const;
  void handle_alloc(const TraceEvent& ev);
  void handle_free(const TraceEvent& ev, std::uint64_t epoch);
  void handle_setperm(const TraceEvent& ev);
  void emit_epoch(RunResult& res, EpochAccum& acc, std::uint64_t epoch, bool resize,
                  double elapsed_us);

  SimConfig cfg_;
  std::unique_ptr<SwitchBudget> budget_;
  std::unique_ptr<AddressSpace> addr_;
  std::unique_ptr<ProtectionTable> prot_;
  std::unique_ptr<RegionMap> regions_;
  std::unique_ptr<Fabric> fabric_;
  std::unique_ptr<CoherenceEngine> engine_;
  std::unique_ptr<SplitController> split_;
  std::map<std::uint64_t, std::uint64_t> block_false_;
  std::map<std::string, VirtAddr> symbols_;
};

// Convenience wrapper for tests and sweeps.
RunResult run_trace(const SimConfig& cfg, const std::vector<TraceEvent>& trace);

}  // namespace netmmu

#endif  // NETMMU_SIM_HPP_
