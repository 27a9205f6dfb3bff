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

#include <sstream>
#include <string>

#include "netmmu/generator.hpp"
#include "netmmu/oracle.hpp"
#include "netmmu/sim.hpp"
#include "netmmu/trace.hpp"

using namespace netmmu;

namespace {

SimConfig small_config() {
  SimConfig cfg;
  cfg.compute_blades = 4;
  cfg.blade_capacity = 16ull << 20;
  cfg.cache_pages = 64;
  cfg.top_region = 64 * 1024;
  cfg.initial_region = 16 * 1024;
  cfg.epoch_ms = 0.1;  // plenty of boundaries in microsecond-scale runs
  return cfg;
}

std::vector<TraceEvent> parse(const std::string& text) {
  std::istringstream is(text);
  return parse_trace(is);
}

DiffReport run_and_compare(const SimConfig& cfg, const std::vector<TraceEvent>& trace) {
  RunResult res = run_trace(cfg, trace);
  OracleReplay oracle(cfg);
  OracleResult expected = oracle.replay(trace);
  return oracle_compare(expected, res);
}

}  // namespace

TEST_CASE("hand-written mixed trace matches the oracle end to end") {
  std::string text =
      "1,0,1,ALLOC,64K,buf\n"
      "2,0,1,W,$buf\n"
      "3,1,1,R,$buf\n"          // reads blade 0's value
      "4,1,1,W,$buf+0x1000\n"
      "5,2,1,R,$buf+0x1000\n"
      "6,0,1,W,$buf\n"          // back to blade 0
      "7,3,1,R,$buf\n"
      "8,0,1,SETPERM,$buf:8K,ro\n"
      "9,0,1,W,$buf\n"          // now denied
      "10,0,1,R,$buf\n"         // still readable
      "11,0,1,SETPERM,$buf,rw\n"
      "12,0,1,W,$buf\n"
      "13,0,1,FREE,$buf\n"
      "14,0,1,ALLOC,16K,buf2\n"
      "15,1,1,R,$buf2\n";
  DiffReport diff = run_and_compare(small_config(), parse(text));
  CHECK(diff.empty());
  CHECK(diff.to_string().empty());
}

TEST_CASE("oracle flags value staleness injected into the run") {
  std::vector<TraceEvent> trace = parse(
      "1,0,1,ALLOC,16K,x\n"
      "2,0,1,W,$x\n"
      "3,1,1,R,$x\n");
  SimConfig cfg = small_config();
  RunResult res = run_trace(cfg, trace);
  OracleReplay oracle(cfg);
  OracleResult expected = oracle.replay(trace);
  CHECK(oracle_compare(expected, res).empty());

  SUBCASE("a stale read tag") {
    for (auto& a : res.logs.accesses) {
      if (a.seq == 3) a.read_tag = ValueTag{};  // pretend the read saw zeroes
    }
    DiffReport diff = oracle_compare(expected, res);
    CHECK_FALSE(diff.empty());
    CHECK(diff.to_string().find("seq 3") != std::string::npos);
  }

  SUBCASE("a wrong final memory image") {
    REQUIRE_FALSE(res.final_tags.empty());
    res.final_tags.begin()->second.seq += 1;
    CHECK_FALSE(oracle_compare(expected, res).empty());
  }

  SUBCASE("a dropped access record") {
    res.logs.accesses.pop_back();
    CHECK_FALSE(oracle_compare(expected, res).empty());
  }

  SUBCASE("a flipped protection outcome") {
    res.logs.accesses.back().allowed = false;
    CHECK_FALSE(oracle_compare(expected, res).empty());
  }
}

TEST_CASE("oracle recounts false invalidations from structural logs") {
  // Five dirty pages, cross-blade write: 4 false invalidations per the
  // independent census.
  std::string text =
      "1,0,1,ALLOC,64K,b\n"
      "2,0,1,W,$b\n"
      "3,0,1,W,$b+0x1000\n"
      "4,0,1,W,$b+0x2000\n"
      "5,0,1,W,$b+0x3000\n"
      "6,0,1,W,$b+0x4000\n"
      "7,1,1,W,$b\n";
  SimConfig cfg = small_config();
  cfg.initial_region = 64 * 1024;  // one region covers the allocation
  std::vector<TraceEvent> trace = parse(text);
  RunResult res = run_trace(cfg, trace);
  CHECK(res.totals.false_invals == 4);

  OracleReplay oracle(cfg);
  OracleResult expected = oracle.replay(trace);
  CHECK(oracle_compare(expected, res).empty());

  SUBCASE("undercounted false invalidations are caught") {
    for (auto& r : res.logs.invals) {
      if (r.false_invals > 0) {
        r.false_invals -= 1;
        break;
      }
    }
    DiffReport diff = oracle_compare(expected, res);
    CHECK_FALSE(diff.empty());
    CHECK(diff.to_string().find("false invalidations") != std::string::npos);
  }

  SUBCASE("rows lying about epoch totals are caught") {
    REQUIRE_FALSE(res.rows.empty());
    res.rows.back().false_invals += 1;
    CHECK_FALSE(oracle_compare(expected, res).empty());
  }

  SUBCASE("a hidden eviction dirty bit is caught") {
    // Force an eviction record inconsistency instead: claim the flushed
    // trigger page was still dirty at an eviction that never happened... the
    // cheapest honest probe is flipping was_dirty on a real record if one
    // exists; absent evictions, flip a flushed count.
    if (!res.logs.evicts.empty()) {
      res.logs.evicts.back().was_dirty = !res.logs.evicts.back().was_dirty;
    } else {
      res.logs.invals.back().flushed += 1;
    }
    CHECK_FALSE(oracle_compare(expected, res).empty());
  }
}

TEST_CASE("freed ranges read as zero pages after reallocation") {
  std::string text =
      "1,0,1,ALLOC,16K,a\n"
      "2,0,1,W,$a\n"
      "3,0,1,FREE,$a\n"
      "4,0,1,ALLOC,16K,b\n"  // same hole, same base
      "5,1,1,R,$b\n";
  SimConfig cfg = small_config();
  std::vector<TraceEvent> trace = parse(text);
  RunResult res = run_trace(cfg, trace);

  // The allocator reuses the base; the read must see the initial tag, not
  // blade 0's stale write.
  REQUIRE(res.logs.accesses.size() == 2);
  CHECK(res.logs.accesses[1].read_tag == ValueTag{});
  CHECK(res.final_tags.empty());

  OracleReplay oracle(cfg);
  CHECK(oracle_compare(oracle.replay(trace), res).empty());
}

TEST_CASE("oracle and sim agree on permission checks under SETPERM churn") {
  std::string text =
      "1,0,1,ALLOC,32K,m\n"
      "2,0,2,R,$m\n"            // pdid 2: denied (no grant)
      "3,0,1,SETPERM,$m:4K,none\n"
      "4,0,1,R,$m\n"            // revoked page: denied
      "5,0,1,R,$m+0x1000\n"     // rest of vma: allowed
      "6,0,1,SETPERM,$m+0x1000:4K,ro\n"
      "7,0,1,W,$m+0x1000\n"     // ro: denied
      "8,0,1,R,$m+0x1000\n"
      "9,0,1,W,$m+0x4000\n";
  SimConfig cfg = small_config();
  std::vector<TraceEvent> trace = parse(text);
  RunResult res = run_trace(cfg, trace);
  CHECK(res.totals.denied == 3);

  OracleReplay oracle(cfg);
  OracleResult expected = oracle.replay(trace);
  CHECK(oracle_compare(expected, res).empty());
}

TEST_CASE("generated workloads verify across feature corners") {
  GeneratorSpec gen;
  gen.working_set_pages = 128;
  gen.ops_per_blade = 600;
  gen.blades = 4;

  SimConfig cfg = small_config();
  SUBCASE("defaults") {}
  SUBCASE("read heavy, high sharing") {
    gen.read_ratio = 0.9;
    gen.sharing_ratio = 0.9;
  }
  SUBCASE("tiny cache evicts constantly") { cfg.cache_pages = 8; }
  SUBCASE("lossy fabric resets") {
    cfg.reliability.loss_rate = 0.2;
    cfg.reliability.max_retries = 1;
    cfg.reliability.timeout_us = 20.0;
  }
  SUBCASE("page-sized initial regions") { cfg.initial_region = 4096; }

  gen.seed = cfg.seed;
  std::vector<TraceEvent> trace = generate_trace(gen, cfg.page_size);
  DiffReport diff = run_and_compare(cfg, trace);
  INFO(diff.to_string());
  CHECK(diff.empty());
}
