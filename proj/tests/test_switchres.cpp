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

#include <doctest.h>

#include "netmmu/error.hpp"
#include "netmmu/switchres.hpp"

using namespace netmmu;

TEST_CASE("rule budget is shared across categories") {
  SwitchBudget b(10, 100);
  CHECK(b.try_reserve_rules(RuleCategory::kTranslation, 40));
  CHECK(b.try_reserve_rules(RuleCategory::kProtection, 40));
  CHECK(b.try_reserve_rules(RuleCategory::kOutlier, 20));
  CHECK(b.rules_used_total() == 100);
  // One more of any category must fail: the pools compete for one TCAM.
  CHECK_FALSE(b.try_reserve_rules(RuleCategory::kTranslation, 1));
  CHECK_FALSE(b.try_reserve_rules(RuleCategory::kProtection, 1));

  b.release_rules(RuleCategory::kProtection, 40);
  CHECK(b.rules_used(RuleCategory::kProtection) == 0);
  CHECK(b.rules_used(RuleCategory::kTranslation) == 40);
  CHECK(b.try_reserve_rules(RuleCategory::kProtection, 40));
}

TEST_CASE("directory slots are independent of rules") {
  SwitchBudget b(4, 2);
  CHECK(b.try_reserve_directory(4));
  CHECK_FALSE(b.try_reserve_directory(1));
  // Exhausted slots do not block rules, and vice versa.
  CHECK(b.try_reserve_rules(RuleCategory::kTranslation, 2));
  b.release_directory(2);
  CHECK(b.directory_used() == 2);
  CHECK(b.try_reserve_directory(2));
}

TEST_CASE("utilization ratios") {
  SwitchBudget b(8, 10);
  b.try_reserve_directory(2);
  b.try_reserve_rules(RuleCategory::kProtection, 5);
  CHECK(b.directory_utilization() == doctest::Approx(0.25));
  CHECK(b.rule_utilization() == doctest::Approx(0.5));
}

TEST_CASE("release underflow is an internal error") {
  SwitchBudget b(4, 4);
  CHECK_THROWS_AS(b.release_directory(1), SimError);
  CHECK_THROWS_AS(b.release_rules(RuleCategory::kOutlier, 1), SimError);
}

TEST_CASE("reserve_rules throws a capacity error when exhausted") {
  SwitchBudget b(1, 1);
  b.reserve_rules(RuleCategory::kTranslation, 1);
  try {
    b.reserve_rules(RuleCategory::kTranslation, 1);
    FAIL("expected capacity error");
  } catch (const SimError& e) {
    CHECK(e.kind() == ErrKind::kCapacity);
  }
}
