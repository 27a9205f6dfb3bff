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

#include "netmmu/config.hpp"
#include "netmmu/error.hpp"
#include "netmmu/trace.hpp"

using namespace netmmu;

namespace {

std::vector<TraceEvent> parse(const std::string& text) {
  std::istringstream is(text);
  return parse_trace(is);
}

std::string parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const SimError& e) {
    CHECK(e.kind() == ErrKind::kTrace);
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("size tokens: decimal, hex, binary suffixes") {
  CHECK(parse_size("4096") == 4096);
  CHECK(parse_size("0x1000") == 4096);
  CHECK(parse_size("0X10") == 16);
  CHECK(parse_size("4K") == 4096);
  CHECK(parse_size("2M") == 2 * 1024 * 1024);
  CHECK(parse_size("1G") == 1024ull * 1024 * 1024);
  CHECK_THROWS_AS(parse_size(""), SimError);
  CHECK_THROWS_AS(parse_size("12Q"), SimError);
  CHECK_THROWS_AS(parse_size("0x"), SimError);
  CHECK_THROWS_AS(parse_size("4096 "), SimError);  // trailing garbage
  CHECK_THROWS_AS(parse_size("-1"), SimError);
}

TEST_CASE("a full trace with comments, symbols and every op kind") {
  std::string text =
      "# workload header comment\n"
      "1,0,1,ALLOC,64K,buf\n"
      "\n"
      "2,0,1,W,$buf+0x1000\n"
      "3,1,1,R,$buf\n"
      "4,0,1,SETPERM,$buf:8K,ro\n"
      "5,0,1,SETPERM,$buf,none\n"
      "6,2,2,R,0x200000   # trailing comment\n"
      "7,0,1,FREE,$buf\n";
  std::vector<TraceEvent> ev = parse(text);
  REQUIRE(ev.size() == 7);

  CHECK(ev[0].op == OpKind::kAlloc);
  CHECK(ev[0].size == 65536);
  CHECK(ev[0].name == "buf");

  CHECK(ev[1].op == OpKind::kWrite);
  CHECK(ev[1].symbol == "buf");
  CHECK(ev[1].offset == 0x1000);
  CHECK(ev[1].blade == 0);

  CHECK(ev[2].op == OpKind::kRead);
  CHECK(ev[2].offset == 0);

  CHECK(ev[3].op == OpKind::kSetPerm);
  CHECK(ev[3].size == 8192);
  CHECK_FALSE(ev[3].none_perm);
  CHECK(ev[3].pc.readable);
  CHECK_FALSE(ev[3].pc.writable);

  CHECK(ev[4].op == OpKind::kSetPerm);
  CHECK(ev[4].size == 0);  // whole vma
  CHECK(ev[4].none_perm);

  CHECK(ev[5].addr == 0x200000);
  CHECK(ev[5].pdid == 2);

  CHECK(ev[6].op == OpKind::kFree);
  CHECK(ev[6].symbol == "buf");
}

TEST_CASE("parse errors carry the offending line number") {
  CHECK(parse_error("1,0,1,R\n").find("line 1") != std::string::npos);
  CHECK(parse_error("1,0,1,R,0x0\n2,0,1,JUMP,0x0\n").find("line 2") != std::string::npos);
  CHECK(parse_error("1,0,1,R,0x0\n1,0,1,R,0x0\n").find("line 2") != std::string::npos);
  CHECK(parse_error("2,0,1,R,0x0\n1,0,1,R,0x0\n").find("line 2") != std::string::npos);
  CHECK(parse_error("1,0,1,SETPERM,0x0,rx\n").find("line 1") != std::string::npos);
  CHECK(parse_error("1,0,1,ALLOC,\n").find("line 1") != std::string::npos);
  CHECK(parse_error("x,0,1,R,0x0\n").find("line 1") != std::string::npos);
  CHECK(parse_error("1,0,1,R,$bad name\n").find("line 1") != std::string::npos);
}

TEST_CASE("format_trace round-trips through the parser") {
  std::string text =
      "1,0,1,ALLOC,64K,buf\n"
      "2,0,1,W,$buf+0x1000\n"
      "3,1,1,R,0x4000\n"
      "4,0,1,SETPERM,$buf:8K,rw\n"
      "5,0,1,SETPERM,0x4000:0x1000,none\n"
      "6,0,1,SETPERM,$buf,ro\n"
      "7,0,1,FREE,$buf\n"
      "8,3,2,ALLOC,4096\n";
  std::vector<TraceEvent> first = parse(text);
  std::vector<TraceEvent> second = parse(format_trace(first));
  REQUIRE(first.size() == second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    const TraceEvent& a = first[i];
    const TraceEvent& b = second[i];
    CHECK(a.seq == b.seq);
    CHECK(a.blade == b.blade);
    CHECK(a.pdid == b.pdid);
    CHECK(a.op == b.op);
    CHECK(a.addr == b.addr);
    CHECK(a.symbol == b.symbol);
    CHECK(a.offset == b.offset);
    CHECK(a.size == b.size);
    CHECK(a.none_perm == b.none_perm);
    CHECK((a.pc <=> b.pc) == std::strong_ordering::equal);
    CHECK(a.name == b.name);
  }
}

TEST_CASE("config files: keys, comments, and lined errors") {
  SimConfig cfg;
  std::istringstream good(
      "# sim setup\n"
      "page-size = 4096\n"
      "top-region = 128K\n"
      "initial-region=16K\n"
      "epoch-ms = 2.5\n"
      "latency.one-way-hop = 3.0\n"
      "seed = 99\n");
  load_config(good, cfg);
  CHECK(cfg.page_size == 4096);
  CHECK(cfg.top_region == 131072);
  CHECK(cfg.initial_region == 16384);
  CHECK(cfg.epoch_ms == doctest::Approx(2.5));
  CHECK(cfg.latency.one_way_hop_us == doctest::Approx(3.0));
  CHECK(cfg.seed == 99);
  cfg.validate();

  SimConfig bad;
  std::istringstream unknown("page-size = 4096\nno-such-key = 1\n");
  try {
    load_config(unknown, bad);
    FAIL("expected config error");
  } catch (const SimError& e) {
    CHECK(e.kind() == ErrKind::kConfig);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("config validation names the offending key") {
  SimConfig cfg;
  cfg.page_size = 3000;  // not a power of two
  try {
    cfg.validate();
    FAIL("expected validation error");
  } catch (const SimError& e) {
    CHECK(std::string(e.what()).find("page-size") != std::string::npos);
  }

  SimConfig order;
  order.initial_region = order.top_region * 2;
  CHECK_THROWS_AS(order.validate(), SimError);

  SimConfig loss;
  loss.reliability.loss_rate = 1.0;  // certain loss can never finish a run
  try {
    loss.validate();
    FAIL("expected validation error");
  } catch (const SimError& e) {
    CHECK(std::string(e.what()).find("loss-rate") != std::string::npos);
  }
}
