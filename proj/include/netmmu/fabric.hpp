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

#ifndef NETMMU_FABRIC_HPP_
#define NETMMU_FABRIC_HPP_

#include <array>
#include <cstdint>
#include <vector>

#include "netmmu/types.hpp"
#include "netmmu/util.hpp"

namespace netmmu {

// All times in microseconds. Defaults calibrate the model so that an
// uncontended no-invalidation fetch costs 9.0 us (four one-way hops plus one
// pipeline pass and one recirculation) and the sequential flush-then-fetch
// paths cost exactly twice that.
struct LatencyParams {
  double one_way_hop_us = 2.0;
  double switch_pipeline_us = 0.5;
  double recirculation_us = 0.5;
  double tlb_shootdown_us = 2.0;
  double local_hit_us = 0.1;
  double inval_service_us = 1.0;
};

struct ReliabilityParams {
  double loss_rate = 0.0;   // per-message drop probability
  double timeout_us = 100.0;
  int max_retries = 3;      // additional attempts after the first
};

enum class MsgKind : std::uint8_t {
  kFetchReq = 0,
  kFetchResp,
  kInval,
  kInvalAck,
  kWriteback,
  kReset,
  kCount_,
};

// Wire-level record, kept for optional capture in tests. src/dst encoding:
// compute blades are their index, kSwitchNode is the switch, kMemoryNode any
// memory blade (the cost model does not distinguish memory blades).
struct Message {
  static constexpr std::int32_t kSwitchNode = -1;
  static constexpr std::int32_t kMemoryNode = -2;
  MsgKind kind;
  std::int32_t src;
  std::int32_t dst;
  VirtAddr addr;
  std::uint64_t seq;  // per-run unique
};

// Result of one requester-visible message exchange. `latency` includes any
// timeout penalties; `delivered == false` means retries were exhausted and
// the caller must fall back to the reset path.
struct LegOutcome {
  bool delivered = false;
  double latency_us = 0.0;
  int timeouts = 0;
};

struct InvalLegOutcome {
  bool delivered = false;   // acked back to the switch
  bool applied = false;     // the invalidation reached the blade at least once
  double latency_us = 0.0;
  double queue_wait_us = 0.0;
  int timeouts = 0;
};

// Network and switch cost model plus the seeded loss process. State
// transitions never depend on this class; it prices them and tracks
// per-compute-blade invalidation service queues in simulated time.
class Fabric {
 public:
  Fabric(const LatencyParams& lat, const ReliabilityParams& rel, std::uint64_t seed,
         std::uint32_t compute_blades);

  // Full remote fetch: requester -> switch -> memory -> switch -> requester,
  // one pipeline pass, one recirculation for the directory update.
  double fetch_cost() const {
    return 4 * lat_.one_way_hop_us + lat_.switch_pipeline_us + lat_.recirculation_us;
  }
  // A denied access travels to the switch and is rejected there.
  double deny_cost() const { return 2 * lat_.one_way_hop_us + lat_.switch_pipeline_us; }
  double local_hit_cost() const { return lat_.local_hit_us; }

  // Requester-visible fetch exchange with loss and retries.
  LegOutcome fetch_leg(std::uint64_t page);

  // One invalidation round to `blade`, egressing the switch at egress_us.
  // flush_shape selects the M-path round (the victim writes dirty data back
  // to memory before acking: one extra hop) over the plain invalidation
  // round. Queue wait accrues at the blade: concurrent invalidations
  // serialize on inval_service_us each.
  InvalLegOutcome inval_leg(ComputeBladeId blade, double egress_us, bool flush_shape,
                            std::uint64_t page);

  // Background transfer (eviction/flush writebacks): losses are drawn and
  // retried silently; only the message counters move.
  void background_send(MsgKind kind, std::uint64_t page, std::uint64_t count = 1);

  // Control-plane reset broadcast; reliable by construction.
  void reset_broadcast(std::uint64_t page);

  const LatencyParams& latency() const { return lat_; }
  const ReliabilityParams& reliability() const { return rel_; }

  std::uint64_t messages_sent(MsgKind k) const {
    return sent_[static_cast<std::size_t>(k)];
  }
  std::uint64_t messages_sent_total() const;
  std::uint64_t retransmissions() const { return retransmissions_; }
  std::uint64_t fetch_legs_started() const { return fetch_started_; }
  std::uint64_t fetch_legs_delivered() const { return fetch_delivered_; }
  std::uint64_t resets_issued() const { return resets_; }

  // Test hook: capture every message sent. Not used on hot paths otherwise.
  void attach_log(std::vector<Message>* log) { log_ = log; }

 private:
  bool deliver();  // one loss draw
  void count(MsgKind kind, std::int32_t src, std::int32_t dst, std::uint64_t page);

  LatencyParams lat_;
  ReliabilityParams rel_;
  DetRng rng_;
  std::vector<double> busy_until_;  // per compute blade
  std::array<std::uint64_t, static_cast<std::size_t>(MsgKind::kCount_)> sent_{};
  std::uint64_t retransmissions_ = 0;
  std::uint64_t fetch_started_ = 0;
  std::uint64_t fetch_delivered_ = 0;
  std::uint64_t resets_ = 0;
  std::uint64_t msg_seq_ = 0;
  std::vector<Message>* log_ = nullptr;
};

}  // namespace netmmu

#endif  // NETMMU_FABRIC_HPP_
