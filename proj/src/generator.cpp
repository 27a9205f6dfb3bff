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

#include "netmmu/generator.hpp"

#include <cmath>
#include <string>

#include "netmmu/error.hpp"
#include "netmmu/util.hpp"

namespace netmmu {

namespace {
constexpr std::uint64_t kGenStream = 0x67656e31;  // generator draw stream
constexpr Pdid kGenPdid = 1;
}  // namespace

void GeneratorSpec::validate() const {
  if (read_ratio < 0.0 || read_ratio > 1.0) {
    throw SimError(ErrKind::kConfig, "generator read-ratio must be in [0, 1]");
  }
  if (sharing_ratio < 0.0 || sharing_ratio > 1.0) {
    throw SimError(ErrKind::kConfig, "generator sharing-ratio must be in [0, 1]");
  }
  if (blades == 0 || blades > 32) {
    throw SimError(ErrKind::kConfig, "generator blades must be in [1, 32]");
  }
  if (ops_per_blade == 0) {
    throw SimError(ErrKind::kConfig, "generator ops-per-blade must be positive");
  }
  if (working_set_pages < 2 * static_cast<std::uint64_t>(blades)) {
    throw SimError(ErrKind::kConfig,
                   "generator working-set must be at least 2 pages per blade");
  }
}

std::vector<TraceEvent> generate_trace(const GeneratorSpec& spec, std::uint64_t page_size) {
  spec.validate();

  // Pool sizes: the shared pool takes sharing-ratio of the working set (at
  // least one page whenever it can be targeted), the rest splits evenly.
  std::uint64_t shared_pages = 0;
  if (spec.sharing_ratio > 0.0) {
    shared_pages = static_cast<std::uint64_t>(
        std::llround(spec.sharing_ratio * static_cast<double>(spec.working_set_pages)));
    if (shared_pages == 0) shared_pages = 1;
    if (shared_pages > spec.working_set_pages) shared_pages = spec.working_set_pages;
  }
  std::uint64_t priv_pages = (spec.working_set_pages - shared_pages) / spec.blades;
  if (spec.sharing_ratio < 1.0 && priv_pages == 0) {
    throw SimError(ErrKind::kConfig,
                   "generator working-set too small for the private pools");
  }

  std::vector<TraceEvent> out;
  out.reserve(1 + spec.blades + spec.blades * spec.ops_per_blade);
  std::uint64_t seq = 0;

  auto alloc = [&](std::uint32_t blade, std::uint64_t pages, const std::string& name) {
    TraceEvent ev;
    ev.seq = ++seq;
    ev.blade = blade;
    ev.pdid = kGenPdid;
    ev.op = OpKind::kAlloc;
    ev.size = pages * page_size;
    ev.name = name;
    out.push_back(std::move(ev));
  };

  if (shared_pages > 0) alloc(0, shared_pages, "shared");
  for (std::uint32_t b = 0; b < spec.blades; ++b) {
    if (priv_pages > 0) alloc(b, priv_pages, "priv" + std::to_string(b));
  }

  DetRng rng(spec.seed, kGenStream);
  std::uint64_t total = static_cast<std::uint64_t>(spec.blades) * spec.ops_per_blade;
  for (std::uint64_t i = 0; i < total; ++i) {
    std::uint32_t blade = static_cast<std::uint32_t>(i % spec.blades);
    TraceEvent ev;
    ev.seq = ++seq;
    ev.blade = blade;
    ev.pdid = kGenPdid;
    ev.op = rng.chance(spec.read_ratio) ? OpKind::kRead : OpKind::kWrite;
    bool to_shared = shared_pages > 0 && rng.chance(spec.sharing_ratio);
    if (to_shared) {
      ev.symbol = "shared";
      ev.offset = rng.below(shared_pages) * page_size;
    } else {
      ev.symbol = "priv" + std::to_string(blade);
      ev.offset = rng.below(priv_pages) * page_size;
    }
    out.push_back(std::move(ev));
  }
  return out;
}

}  // namespace netmmu
