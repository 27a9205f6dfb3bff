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

#ifndef NETMMU_SWEEPS_HPP_
#define NETMMU_SWEEPS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "netmmu/config.hpp"
#include "netmmu/generator.hpp"

namespace netmmu {

// One synthetic run per (read-ratio, sharing-ratio) cell, all cells sharing
// the base generator seed. CSV columns:
//   read_ratio,sharing_ratio,iops,mean_us,remote_accesses,invals_sent,false_invals
std::string sweep_throughput_grid(const SimConfig& base, const GeneratorSpec& gen,
                                  const std::vector<double>& read_ratios,
                                  const std::vector<double>& sharing_ratios);

// One run per (initial-region, epoch-length) setting over the identical
// generated trace. CSV columns:
//   initial_region,epoch_ms,final_regions,peak_regions,false_invals,splits,merges
std::string sweep_splitting_tradeoff(const SimConfig& base, const GeneratorSpec& gen,
                                     const std::vector<std::uint64_t>& initial_sizes,
                                     const std::vector<double>& epoch_lengths_ms);

}  // namespace netmmu

#endif  // NETMMU_SWEEPS_HPP_
