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

#include "netmmu/trace.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <sstream>

#include "netmmu/error.hpp"

namespace netmmu {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(trim(cur));
  return out;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw SimError(ErrKind::kTrace, "trace line " + std::to_string(line_no) + ": " + what);
}

std::uint64_t parse_u64(const std::string& token, std::size_t line_no, const char* field) {
  try {
    return parse_size(token);
  } catch (const SimError&) {
    fail(line_no, std::string("bad ") + field + " '" + token + "'");
  }
}

bool valid_symbol(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

// addr-spec: absolute number | $name | $name+number
void parse_addr(const std::string& token, std::size_t line_no, TraceEvent& ev) {
  if (token.empty()) fail(line_no, "empty address");
  if (token[0] != '$') {
    ev.addr = parse_u64(token, line_no, "address");
    return;
  }
  std::size_t plus = token.find('+');
  std::string name = token.substr(1, plus == std::string::npos ? std::string::npos : plus - 1);
  if (!valid_symbol(name)) fail(line_no, "bad symbol reference '" + token + "'");
  ev.symbol = name;
  ev.offset = plus == std::string::npos ? 0 : parse_u64(token.substr(plus + 1), line_no, "offset");
}

}  // namespace

const char* op_name(OpKind op) {
  switch (op) {
    case OpKind::kRead: return "R";
    case OpKind::kWrite: return "W";
    case OpKind::kAlloc: return "ALLOC";
    case OpKind::kFree: return "FREE";
    case OpKind::kSetPerm: return "SETPERM";
  }
  return "?";
}

std::uint64_t parse_size(const std::string& token) {
  if (token.empty()) throw SimError(ErrKind::kTrace, "empty number");
  std::string body = token;
  std::uint64_t scale = 1;
  switch (std::toupper(static_cast<unsigned char>(body.back()))) {
    case 'K': scale = 1ull << 10; body.pop_back(); break;
    case 'M': scale = 1ull << 20; body.pop_back(); break;
    case 'G': scale = 1ull << 30; body.pop_back(); break;
    default: break;
  }
  if (body.empty() || !std::isdigit(static_cast<unsigned char>(body[0]))) {
    throw SimError(ErrKind::kTrace, "bad number '" + token + "'");
  }
  int base = 10;
  if (body.size() > 2 && body[0] == '0' && (body[1] == 'x' || body[1] == 'X')) base = 16;
  std::size_t used = 0;
  std::uint64_t value = 0;
  try {
    value = std::stoull(body, &used, base);
  } catch (const std::exception&) {
    throw SimError(ErrKind::kTrace, "bad number '" + token + "'");
  }
  if (used != body.size()) throw SimError(ErrKind::kTrace, "bad number '" + token + "'");
  return value * scale;
}

std::vector<TraceEvent> parse_trace(std::istream& in) {
  std::vector<TraceEvent> events;
  std::string line;
  std::size_t line_no = 0;
  bool have_prev = false;
  std::uint64_t prev_seq = 0;

  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string body = trim(line);
    if (body.empty()) continue;

    std::vector<std::string> f = split(body, ',');
    if (f.size() < 5) fail(line_no, "expected seq,blade,pdid,op,arg1[,arg2]");

    TraceEvent ev;
    ev.seq = parse_u64(f[0], line_no, "seq");
    ev.blade = static_cast<std::uint32_t>(parse_u64(f[1], line_no, "blade"));
    ev.pdid = static_cast<Pdid>(parse_u64(f[2], line_no, "pdid"));
    if (have_prev && ev.seq <= prev_seq) fail(line_no, "seq not strictly increasing");
    prev_seq = ev.seq;
    have_prev = true;

    const std::string& op = f[3];
    if (op == "R" || op == "W") {
      ev.op = op == "R" ? OpKind::kRead : OpKind::kWrite;
      parse_addr(f[4], line_no, ev);
    } else if (op == "ALLOC") {
      ev.op = OpKind::kAlloc;
      ev.size = parse_u64(f[4], line_no, "size");
      if (ev.size == 0) fail(line_no, "zero-size allocation");
      if (f.size() >= 6 && !f[5].empty()) {
        if (!valid_symbol(f[5])) fail(line_no, "bad allocation name '" + f[5] + "'");
        ev.name = f[5];
      }
    } else if (op == "FREE") {
      ev.op = OpKind::kFree;
      parse_addr(f[4], line_no, ev);
    } else if (op == "SETPERM") {
      ev.op = OpKind::kSetPerm;
      std::string spec = f[4];
      std::size_t colon = spec.rfind(':');
      // A colon splits off the extent length; '$' never contains ':' so the
      // rightmost one is unambiguous.
      if (colon != std::string::npos) {
        ev.size = parse_u64(spec.substr(colon + 1), line_no, "length");
        if (ev.size == 0) fail(line_no, "zero-length extent");
        spec = trim(spec.substr(0, colon));
      }
      parse_addr(spec, line_no, ev);
      if (f.size() < 6) fail(line_no, "SETPERM needs a permission class");
      const std::string& pc = f[5];
      if (pc == "ro") {
        ev.pc = PermissionClass::ro();
      } else if (pc == "rw") {
        ev.pc = PermissionClass::rw();
      } else if (pc == "none") {
        ev.none_perm = true;
        ev.pc = PermissionClass::none();
      } else {
        fail(line_no, "bad permission class '" + pc + "' (want ro|rw|none)");
      }
    } else {
      fail(line_no, "unknown op '" + op + "'");
    }
    events.push_back(std::move(ev));
  }
  return events;
}

std::string format_trace(const std::vector<TraceEvent>& events) {
  std::ostringstream out;
  for (const TraceEvent& ev : events) {
    out << ev.seq << ',' << ev.blade << ',' << ev.pdid << ',' << op_name(ev.op) << ',';
    switch (ev.op) {
      case OpKind::kRead:
      case OpKind::kWrite:
      case OpKind::kFree:
        if (ev.symbol.empty()) {
          out << "0x" << std::hex << ev.addr << std::dec;
        } else {
          out << '$' << ev.symbol;
          if (ev.offset != 0) out << "+0x" << std::hex << ev.offset << std::dec;
        }
        break;
      case OpKind::kAlloc:
        out << ev.size;
        if (!ev.name.empty()) out << ',' << ev.name;
        break;
      case OpKind::kSetPerm:
        if (ev.symbol.empty()) {
          out << "0x" << std::hex << ev.addr << std::dec;
        } else {
          out << '$' << ev.symbol;
          if (ev.offset != 0) out << "+0x" << std::hex << ev.offset << std::dec;
        }
        if (ev.size != 0) out << ':' << ev.size;
        out << ',' << (ev.none_perm ? "none" : (ev.pc.writable ? "rw" : "ro"));
        break;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace netmmu
