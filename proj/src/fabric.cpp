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

#include "netmmu/fabric.hpp"

#include <algorithm>

#include "netmmu/error.hpp"

namespace netmmu {

namespace {
// Safety valve for "retry until delivered" background flows; hitting it with
// any loss rate below 1 - 2^-64 is a broken RNG, not bad luck.
constexpr int kBackgroundRetryCap = 64;
}  // namespace

Fabric::Fabric(const LatencyParams& lat, const ReliabilityParams& rel, std::uint64_t seed,
               std::uint32_t compute_blades)
    : lat_(lat), rel_(rel), rng_(seed, /*stream=*/0x10055), busy_until_(compute_blades, 0.0) {}

bool Fabric::deliver() { return !rng_.chance(rel_.loss_rate); }

void Fabric::count(MsgKind kind, std::int32_t src, std::int32_t dst, std::uint64_t page) {
  sent_[static_cast<std::size_t>(kind)]++;
  if (log_) log_->push_back(Message{kind, src, dst, page, msg_seq_});
  ++msg_seq_;
}

std::uint64_t Fabric::messages_sent_total() const {
  std::uint64_t t = 0;
  for (auto v : sent_) t += v;
  return t;
}

LegOutcome Fabric::fetch_leg(std::uint64_t page) {
  LegOutcome out;
  ++fetch_started_;
  for (int attempt = 0; attempt <= rel_.max_retries; ++attempt) {
    if (attempt > 0) ++retransmissions_;
    count(MsgKind::kFetchReq, Message::kSwitchNode, Message::kMemoryNode, page);
    if (!deliver()) {
      out.latency_us += rel_.timeout_us;
      ++out.timeouts;
      continue;
    }
    count(MsgKind::kFetchResp, Message::kMemoryNode, Message::kSwitchNode, page);
    if (!deliver()) {
      out.latency_us += rel_.timeout_us;
      ++out.timeouts;
      continue;
    }
    out.latency_us += fetch_cost();
    out.delivered = true;
    ++fetch_delivered_;
    return out;
  }
  return out;  // exhausted; caller resolves via reset
}

InvalLegOutcome Fabric::inval_leg(ComputeBladeId blade, double egress_us, bool flush_shape,
                                  std::uint64_t page) {
  if (blade.index >= busy_until_.size()) {
    throw SimError(ErrKind::kInternal, "invalidation target blade out of range");
  }
  InvalLegOutcome out;
  double now = egress_us;
  for (int attempt = 0; attempt <= rel_.max_retries; ++attempt) {
    if (attempt > 0) ++retransmissions_;
    count(MsgKind::kInval, Message::kSwitchNode, static_cast<std::int32_t>(blade.index), page);
    if (!deliver()) {
      out.latency_us += rel_.timeout_us;
      ++out.timeouts;
      now += rel_.timeout_us;
      continue;
    }
    if (!out.applied) {
      // First delivery occupies the blade's invalidation service queue;
      // redeliveries after a lost ack find the work already done.
      double arrive = now + lat_.one_way_hop_us;
      double start = std::max(arrive, busy_until_[blade.index]);
      out.queue_wait_us = start - arrive;
      busy_until_[blade.index] = start + lat_.inval_service_us;
      out.applied = true;
    }
    count(MsgKind::kInvalAck, static_cast<std::int32_t>(blade.index), Message::kSwitchNode,
          page);
    if (!deliver()) {
      out.latency_us += rel_.timeout_us;
      ++out.timeouts;
      now += rel_.timeout_us;
      continue;
    }
    // Plain round: switch -> blade, service + shootdown, blade -> switch.
    // Flush round: the ack rides behind the dirty writeback through the
    // memory blade, one hop longer.
    double hops = (flush_shape ? 3 : 2) * lat_.one_way_hop_us;
    out.latency_us +=
        hops + lat_.tlb_shootdown_us + lat_.inval_service_us + out.queue_wait_us;
    out.delivered = true;
    return out;
  }
  return out;
}

void Fabric::background_send(MsgKind kind, std::uint64_t page, std::uint64_t count_n) {
  for (std::uint64_t i = 0; i < count_n; ++i) {
    count(kind, Message::kSwitchNode, Message::kMemoryNode, page);
    int tries = 0;
    while (!deliver()) {
      if (++tries > kBackgroundRetryCap) {
        throw SimError(ErrKind::kInternal, "background retry cap exceeded");
      }
      ++retransmissions_;
      count(kind, Message::kSwitchNode, Message::kMemoryNode, page);
    }
  }
}

void Fabric::reset_broadcast(std::uint64_t page) {
  count(MsgKind::kReset, Message::kSwitchNode, Message::kSwitchNode, page);
  ++resets_;
}

}  // namespace netmmu
