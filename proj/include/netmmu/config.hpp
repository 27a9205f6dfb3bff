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

#ifndef NETMMU_CONFIG_HPP_
#define NETMMU_CONFIG_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>

#include "netmmu/fabric.hpp"

namespace netmmu {

// Run configuration. Defaults model a desk-scale rack: two 1 GiB memory
// blades, eight compute blades with 8 Ki-page caches, 2 MiB top-level blocks
// and 16 KiB initial regions, 100 ms epochs.
struct SimConfig {
  std::uint64_t page_size = 4096;
  std::uint32_t compute_blades = 8;
  std::uint32_t memory_blades = 2;
  std::uint64_t blade_capacity = 1ull << 30;  // bytes per memory blade
  std::uint64_t cache_pages = 8192;           // per compute blade
  std::uint32_t dir_capacity = 30000;         // directory slots
  std::uint32_t rule_capacity = 45000;        // match-action rules
  std::uint64_t top_region = 2ull << 20;      // 2 MiB
  std::uint64_t initial_region = 16ull << 10; // 16 KiB
  double epoch_ms = 100.0;
  double c_init = 1.0;
  double merge_factor = 0.5;
  std::uint64_t seed = 1;
  LatencyParams latency;
  ReliabilityParams reliability;

  // Applies one `key=value` setting; keys match the CLI flag names
  // (e.g. "dir-capacity", "latency.one-way-hop"). Throws kConfig naming the
  // key on unknown keys or unparsable values.
  void apply(const std::string& key, const std::string& value);

  // Cross-field validation; throws kConfig naming the offending key.
  void validate() const;

  double epoch_us() const { return epoch_ms * 1000.0; }
};

// Loads `key=value` lines ('#' comments and blanks ignored) on top of the
// given config.
void load_config(std::istream& in, SimConfig& cfg);

}  // namespace netmmu

#endif  // NETMMU_CONFIG_HPP_
