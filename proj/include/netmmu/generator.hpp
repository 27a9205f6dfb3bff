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

#ifndef NETMMU_GENERATOR_HPP_
#define NETMMU_GENERATOR_HPP_

#include <cstdint>
#include <vector>

#include "netmmu/trace.hpp"

namespace netmmu {

// Synthetic uniform-random workload: the working set is carved into one
// shared pool (sharing-ratio of the pages) plus one private pool per blade,
// and each access targets the shared pool with probability sharing-ratio.
// Desk-scale defaults: 4 Ki-page working set, 8 blades, 64 Ki ops per blade.
struct GeneratorSpec {
  double read_ratio = 0.5;     // fraction of accesses that are reads
  double sharing_ratio = 0.5;  // fraction of accesses aimed at the shared pool
  std::uint64_t working_set_pages = 4096;
  std::uint32_t blades = 8;
  std::uint64_t ops_per_blade = 65536;
  std::uint64_t seed = 1;

  void validate() const;  // throws kConfig naming the offending field
};

// Produces a complete trace: ALLOC lines binding $shared and $priv<b>, then
// blades*ops_per_blade accesses round-robin across blades. Deterministic in
// (spec, page_size); runs always consume the materialized trace, so a
// generator run and a replay of its emitted trace are identical by
// construction.
std::vector<TraceEvent> generate_trace(const GeneratorSpec& spec, std::uint64_t page_size);

}  // namespace netmmu

#endif  // NETMMU_GENERATOR_HPP_
