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

#ifndef NETMMU_SWITCHRES_HPP_
#define NETMMU_SWITCHRES_HPP_

#include <array>
#include <cstdint>

#include "netmmu/error.hpp"

namespace netmmu {

// Match-action rule consumers. Rules share one pool; usage is tracked per
// category so utilization can be reported and cross-checked per epoch.
enum class RuleCategory : std::uint8_t { kTranslation = 0, kOutlier = 1, kProtection = 2 };

inline const char* rule_category_name(RuleCategory c) {
  switch (c) {
    case RuleCategory::kTranslation: return "translation";
    case RuleCategory::kOutlier: return "outlier";
    case RuleCategory::kProtection: return "protection";
  }
  return "?";
}

// Accounting for the two finite switch resources: directory slots (coherence
// state) and match-action rules (translation, outlier, protection entries).
// Reservation is atomic: a request is granted in full or rejected with the
// pools untouched.
class SwitchBudget {
 public:
  SwitchBudget(std::uint64_t directory_slots, std::uint64_t match_action_rules)
      : dir_capacity_(directory_slots), rule_capacity_(match_action_rules) {}

  bool try_reserve_rules(RuleCategory cat, std::uint64_t n) {
    if (rules_used_total() + n > rule_capacity_) return false;
    rules_used_[idx(cat)] += n;
    return true;
  }

  void reserve_rules(RuleCategory cat, std::uint64_t n) {
    if (!try_reserve_rules(cat, n)) {
      throw SimError(ErrKind::kCapacity,
                     std::string("match-action rule budget exhausted (") +
                         rule_category_name(cat) + ")");
    }
  }

  void release_rules(RuleCategory cat, std::uint64_t n) {
    if (rules_used_[idx(cat)] < n) {
      throw SimError(ErrKind::kInternal, "rule release underflow");
    }
    rules_used_[idx(cat)] -= n;
  }

  bool try_reserve_directory(std::uint64_t n) {
    if (dir_used_ + n > dir_capacity_) return false;
    dir_used_ += n;
    return true;
  }

  void release_directory(std::uint64_t n) {
    if (dir_used_ < n) throw SimError(ErrKind::kInternal, "slot release underflow");
    dir_used_ -= n;
  }

  std::uint64_t directory_capacity() const { return dir_capacity_; }
  std::uint64_t directory_used() const { return dir_used_; }
  std::uint64_t rule_capacity() const { return rule_capacity_; }
  std::uint64_t rules_used(RuleCategory cat) const { return rules_used_[idx(cat)]; }
  std::uint64_t rules_used_total() const {
    return rules_used_[0] + rules_used_[1] + rules_used_[2];
  }
  double directory_utilization() const {
    return dir_capacity_ == 0 ? 0.0
                              : static_cast<double>(dir_used_) / static_cast<double>(dir_capacity_);
  }
  double rule_utilization() const {
    return rule_capacity_ == 0
               ? 0.0
               : static_cast<double>(rules_used_total()) / static_cast<double>(rule_capacity_);
  }

 private:
  static std::size_t idx(RuleCategory c) { return static_cast<std::size_t>(c); }

  std::uint64_t dir_capacity_;
  std::uint64_t rule_capacity_;
  std::uint64_t dir_used_ = 0;
  std::array<std::uint64_t, 3> rules_used_{};
};

}  // namespace netmmu

#endif  // NETMMU_SWITCHRES_HPP_
