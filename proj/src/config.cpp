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

#include "netmmu/config.hpp"

#include <istream>

#include "netmmu/error.hpp"
#include "netmmu/trace.hpp"
#include "netmmu/util.hpp"

namespace netmmu {

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw SimError(ErrKind::kConfig, "config key '" + key + "': " + why);
}

std::uint64_t as_u64(const std::string& key, const std::string& value) {
  try {
    return parse_size(value);
  } catch (const SimError&) {
    bad(key, "expected an integer (suffixes K/M/G allowed), got '" + value + "'");
  }
}

double as_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    bad(key, "expected a number, got '" + value + "'");
  }
  if (used != value.size()) bad(key, "expected a number, got '" + value + "'");
  return v;
}

}  // namespace

void SimConfig::apply(const std::string& key, const std::string& value) {
  if (key == "page-size") {
    page_size = as_u64(key, value);
  } else if (key == "compute-blades") {
    compute_blades = static_cast<std::uint32_t>(as_u64(key, value));
  } else if (key == "memory-blades") {
    memory_blades = static_cast<std::uint32_t>(as_u64(key, value));
  } else if (key == "blade-capacity") {
    blade_capacity = as_u64(key, value);
  } else if (key == "cache-pages") {
    cache_pages = as_u64(key, value);
  } else if (key == "dir-capacity") {
    dir_capacity = static_cast<std::uint32_t>(as_u64(key, value));
  } else if (key == "rule-capacity") {
    rule_capacity = static_cast<std::uint32_t>(as_u64(key, value));
  } else if (key == "top-region") {
    top_region = as_u64(key, value);
  } else if (key == "initial-region") {
    initial_region = as_u64(key, value);
  } else if (key == "epoch-ms") {
    epoch_ms = as_double(key, value);
  } else if (key == "c-init") {
    c_init = as_double(key, value);
  } else if (key == "merge-factor") {
    merge_factor = as_double(key, value);
  } else if (key == "seed") {
    seed = as_u64(key, value);
  } else if (key == "loss-rate") {
    reliability.loss_rate = as_double(key, value);
  } else if (key == "timeout-us") {
    reliability.timeout_us = as_double(key, value);
  } else if (key == "max-retries") {
    reliability.max_retries = static_cast<int>(as_u64(key, value));
  } else if (key == "latency.one-way-hop") {
    latency.one_way_hop_us = as_double(key, value);
  } else if (key == "latency.pipeline") {
    latency.switch_pipeline_us = as_double(key, value);
  } else if (key == "latency.recirculation") {
    latency.recirculation_us = as_double(key, value);
  } else if (key == "latency.tlb-shootdown") {
    latency.tlb_shootdown_us = as_double(key, value);
  } else if (key == "latency.local-hit") {
    latency.local_hit_us = as_double(key, value);
  } else if (key == "latency.inval-service") {
    latency.inval_service_us = as_double(key, value);
  } else {
    bad(key, "unknown key");
  }
}

void SimConfig::validate() const {
  if (page_size == 0 || !is_pow2(page_size)) bad("page-size", "must be a power of two");
  if (!is_pow2(initial_region)) bad("initial-region", "must be a power of two");
  if (!is_pow2(top_region)) bad("top-region", "must be a power of two");
  if (initial_region < page_size) bad("initial-region", "below page size");
  if (top_region < initial_region) bad("top-region", "below initial region");
  if (compute_blades == 0 || compute_blades > 32) {
    bad("compute-blades", "must be in [1, 32] (sharer sets are 32-bit)");
  }
  if (memory_blades == 0) bad("memory-blades", "need at least one memory blade");
  if (blade_capacity == 0 || blade_capacity % page_size != 0) {
    bad("blade-capacity", "must be a positive multiple of the page size");
  }
  if (blade_capacity % top_region != 0) {
    bad("blade-capacity", "must be a multiple of the top region size");
  }
  if (cache_pages == 0) bad("cache-pages", "must be positive");
  if (dir_capacity == 0) bad("dir-capacity", "must be positive");
  if (rule_capacity == 0) bad("rule-capacity", "must be positive");
  if (epoch_ms <= 0.0) bad("epoch-ms", "must be positive");
  if (c_init <= 0.0) bad("c-init", "must be positive");
  if (merge_factor < 0.0) bad("merge-factor", "must be nonnegative");
  if (reliability.loss_rate < 0.0 || reliability.loss_rate >= 1.0) {
    bad("loss-rate", "must be in [0, 1)");
  }
  if (reliability.timeout_us < 0.0) bad("timeout-us", "must be nonnegative");
  if (reliability.max_retries < 0) bad("max-retries", "must be nonnegative");
  if (latency.one_way_hop_us < 0.0) bad("latency.one-way-hop", "must be nonnegative");
  if (latency.switch_pipeline_us < 0.0) bad("latency.pipeline", "must be nonnegative");
  if (latency.recirculation_us < 0.0) bad("latency.recirculation", "must be nonnegative");
  if (latency.tlb_shootdown_us < 0.0) bad("latency.tlb-shootdown", "must be nonnegative");
  if (latency.local_hit_us < 0.0) bad("latency.local-hit", "must be nonnegative");
  if (latency.inval_service_us < 0.0) bad("latency.inval-service", "must be nonnegative");
}

void load_config(std::istream& in, SimConfig& cfg) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    std::size_t e = line.find_last_not_of(" \t\r");
    std::string body = line.substr(b, e - b + 1);
    std::size_t eq = body.find('=');
    if (eq == std::string::npos) {
      throw SimError(ErrKind::kConfig,
                     "config line " + std::to_string(line_no) + ": expected key=value");
    }
    auto strip = [](std::string s) {
      std::size_t sb = s.find_first_not_of(" \t");
      if (sb == std::string::npos) return std::string();
      std::size_t se = s.find_last_not_of(" \t");
      return s.substr(sb, se - sb + 1);
    };
    try {
      cfg.apply(strip(body.substr(0, eq)), strip(body.substr(eq + 1)));
    } catch (const SimError& e) {
      throw SimError(e.kind(), "config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace netmmu
