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

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "netmmu/error.hpp"
#include "netmmu/generator.hpp"
#include "netmmu/metrics.hpp"
#include "netmmu/oracle.hpp"
#include "netmmu/sim.hpp"
#include "netmmu/sweeps.hpp"
#include "netmmu/trace.hpp"

namespace {

using netmmu::SimConfig;

// One flag per config key, collected in order so later flags override the
// config file.
struct ConfigCli {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key=value config file");
    static const char* kKeys[] = {
        "page-size",     "compute-blades", "memory-blades",  "blade-capacity",
        "cache-pages",   "dir-capacity",   "rule-capacity",  "top-region",
        "initial-region", "epoch-ms",      "c-init",         "merge-factor",
        "seed",          "loss-rate",      "timeout-us",     "max-retries",
        "latency.one-way-hop", "latency.pipeline", "latency.recirculation",
        "latency.tlb-shootdown", "latency.local-hit", "latency.inval-service"};
    for (const char* key : kKeys) {
      app->add_option_function<std::string>(
          std::string("--") + key,
          [this, key](const std::string& v) { overrides.emplace_back(key, v); },
          std::string("config override (") + key + ")");
    }
  }

  SimConfig build() const {
    SimConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        throw netmmu::SimError(netmmu::ErrKind::kConfig,
                               "cannot open config file '" + config_path + "'");
      }
      netmmu::load_config(in, cfg);
    }
    for (const auto& [k, v] : overrides) cfg.apply(k, v);
    cfg.validate();
    return cfg;
  }
};

struct InputCli {
  std::string trace_path;
  bool use_gen = false;
  netmmu::GeneratorSpec gen;
  bool gen_blades_set = false;
  std::string emit_trace_path;

  void attach(CLI::App* app) {
    app->add_option("trace", trace_path, "trace file path, or - for stdin");
    app->add_flag("--gen", use_gen, "generate a synthetic workload instead of reading a trace");
    app->add_option("--read-ratio", gen.read_ratio, "generator: fraction of reads");
    app->add_option("--sharing-ratio", gen.sharing_ratio,
                    "generator: fraction of accesses to the shared pool");
    app->add_option("--working-set", gen.working_set_pages, "generator: working set in pages");
    app->add_option("--ops-per-blade", gen.ops_per_blade, "generator: accesses per blade");
    app->add_option("--emit-trace", emit_trace_path, "write the executed trace to a file");
  }

  std::vector<netmmu::TraceEvent> load(const SimConfig& cfg) {
    std::vector<netmmu::TraceEvent> trace;
    if (use_gen) {
      if (!trace_path.empty()) {
        throw netmmu::SimError(netmmu::ErrKind::kConfig,
                               "give either a trace file or --gen, not both");
      }
      gen.blades = cfg.compute_blades;
      gen.seed = cfg.seed;
      trace = netmmu::generate_trace(gen, cfg.page_size);
    } else if (trace_path == "-") {
      trace = netmmu::parse_trace(std::cin);
    } else if (!trace_path.empty()) {
      std::ifstream in(trace_path);
      if (!in) {
        throw netmmu::SimError(netmmu::ErrKind::kTrace,
                               "cannot open trace file '" + trace_path + "'");
      }
      trace = netmmu::parse_trace(in);
    } else {
      throw netmmu::SimError(netmmu::ErrKind::kTrace, "no input: give a trace file or --gen");
    }
    if (!emit_trace_path.empty()) {
      std::ofstream out(emit_trace_path);
      out << netmmu::format_trace(trace);
    }
    return trace;
  }
};

nlohmann::ordered_json summary_json(const SimConfig& cfg, const netmmu::RunResult& res) {
  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  j["epochs"] = res.rows.size();
  j["exit_code"] = res.exit_code;

  nlohmann::ordered_json totals;
  totals["events"] = res.totals.events;
  totals["accesses"] = res.totals.accesses;
  totals["reads"] = res.totals.reads;
  totals["writes"] = res.totals.writes;
  totals["local_hits"] = res.totals.local_hits;
  totals["remote"] = res.totals.remote;
  totals["denied"] = res.totals.denied;
  totals["faults"] = res.totals.faults;
  totals["invals_sent"] = res.totals.invals_sent;
  totals["pages_flushed"] = res.totals.pages_flushed;
  totals["false_invals"] = res.totals.false_invals;
  totals["evictions"] = res.totals.evictions;
  totals["resets"] = res.totals.resets;
  totals["splits"] = res.totals.splits;
  totals["merges"] = res.totals.merges;
  totals["allocs"] = res.totals.allocs;
  totals["frees"] = res.totals.frees;
  totals["setperms"] = res.totals.setperms;
  totals["sim_time_us"] = res.totals.sim_time_us;
  j["totals"] = totals;

  j["fairness_index"] = res.fairness;
  j["messages_sent"] = res.messages_sent;
  j["retransmissions"] = res.retransmissions;
  j["capacity_pressure_events"] = res.capacity_pressure_events;
  j["forced_resets"] = res.forced_resets;

  char digest[32];
  std::snprintf(digest, sizeof(digest), "%016llx",
                static_cast<unsigned long long>(res.state_digest));
  j["state_digest"] = digest;
  return j;
}

std::vector<double> parse_double_list(const std::string& csv, const char* what) {
  std::vector<double> out;
  std::istringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw netmmu::SimError(netmmu::ErrKind::kConfig,
                             std::string("bad ") + what + " value '" + tok + "'");
    }
  }
  if (out.empty()) {
    throw netmmu::SimError(netmmu::ErrKind::kConfig, std::string("empty ") + what + " list");
  }
  return out;
}

std::vector<std::uint64_t> parse_size_list(const std::string& csv, const char* what) {
  std::vector<std::uint64_t> out;
  std::istringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(netmmu::parse_size(tok));
    } catch (const netmmu::SimError&) {
      throw netmmu::SimError(netmmu::ErrKind::kConfig,
                             std::string("bad ") + what + " value '" + tok + "'");
    }
  }
  if (out.empty()) {
    throw netmmu::SimError(netmmu::ErrKind::kConfig, std::string("empty ") + what + " list");
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) {
    throw netmmu::SimError(netmmu::ErrKind::kConfig, "cannot open output file '" + path + "'");
  }
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"netmmu: in-network memory management simulator"};
  app.require_subcommand(1);

  ConfigCli run_cfg, verify_cfg, grid_cfg, split_cfg;
  InputCli run_in, verify_in;

  // run
  CLI::App* run = app.add_subcommand("run", "execute a trace or synthetic workload");
  run_cfg.attach(run);
  run_in.attach(run);
  std::string metrics_path = "metrics.csv";
  std::string summary_path;
  run->add_option("--metrics", metrics_path, "per-epoch CSV output path (- for stdout)");
  run->add_option("--summary", summary_path, "summary JSON path (default stdout)");

  // verify
  CLI::App* verify = app.add_subcommand("verify", "run and compare against the page-granular oracle");
  verify_cfg.attach(verify);
  verify_in.attach(verify);

  // sweep-grid
  CLI::App* sweep_grid = app.add_subcommand("sweep-grid", "throughput vs read/sharing ratio grid");
  grid_cfg.attach(sweep_grid);
  std::string read_ratios = "0,0.5,1";
  std::string sharing_ratios = "0,0.5,1";
  std::uint64_t grid_ws = 4096, grid_ops = 65536;
  std::string grid_out;
  sweep_grid->add_option("--read-ratios", read_ratios, "comma-separated read ratios");
  sweep_grid->add_option("--sharing-ratios", sharing_ratios, "comma-separated sharing ratios");
  sweep_grid->add_option("--working-set", grid_ws, "working set in pages");
  sweep_grid->add_option("--ops-per-blade", grid_ops, "accesses per blade");
  sweep_grid->add_option("--out", grid_out, "output CSV path (default stdout)");

  // sweep-split
  CLI::App* sweep_split =
      app.add_subcommand("sweep-split", "directory footprint vs false invalidations");
  split_cfg.attach(sweep_split);
  std::string initial_sizes = "4K,16K,64K,256K,2M";
  std::string epoch_list = "1,10,100";
  std::uint64_t split_ws = 4096, split_ops = 65536;
  double split_read = 0.5, split_share = 0.5;
  std::string split_out;
  sweep_split->add_option("--initial-sizes", initial_sizes, "comma-separated region sizes");
  sweep_split->add_option("--epochs-ms", epoch_list, "comma-separated epoch lengths (ms)");
  sweep_split->add_option("--working-set", split_ws, "working set in pages");
  sweep_split->add_option("--ops-per-blade", split_ops, "accesses per blade");
  sweep_split->add_option("--read-ratio", split_read, "generator read ratio");
  sweep_split->add_option("--sharing-ratio", split_share, "generator sharing ratio");
  sweep_split->add_option("--out", split_out, "output CSV path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      SimConfig cfg = run_cfg.build();
      std::vector<netmmu::TraceEvent> trace = run_in.load(cfg);
      netmmu::RunResult res = netmmu::run_trace(cfg, trace);

      std::ostringstream csv;
      netmmu::write_metrics_header(csv);
      for (const netmmu::MetricsRow& row : res.rows) netmmu::write_metrics_row(csv, row);
      write_text(metrics_path, csv.str());

      std::string summary = summary_json(cfg, res).dump(2) + "\n";
      if (summary_path.empty()) {
        std::cout << summary;
      } else {
        write_text(summary_path, summary);
      }
      return res.exit_code;
    }

    if (verify->parsed()) {
      SimConfig cfg = verify_cfg.build();
      std::vector<netmmu::TraceEvent> trace = verify_in.load(cfg);
      netmmu::RunResult res = netmmu::run_trace(cfg, trace);
      netmmu::OracleReplay oracle(cfg);
      netmmu::OracleResult expected = oracle.replay(trace);
      netmmu::DiffReport diff = netmmu::oracle_compare(expected, res);
      if (diff.empty()) {
        std::cout << "verify: OK (" << res.totals.accesses << " accesses, "
                  << res.totals.false_invals << " false invalidations match the census)\n";
        return res.exit_code;
      }
      std::cout << "verify: " << diff.mismatches << " mismatch(es)\n" << diff.to_string();
      return 1;
    }

    if (sweep_grid->parsed()) {
      SimConfig cfg = grid_cfg.build();
      netmmu::GeneratorSpec gen;
      gen.working_set_pages = grid_ws;
      gen.ops_per_blade = grid_ops;
      gen.blades = cfg.compute_blades;
      gen.seed = cfg.seed;
      write_text(grid_out, netmmu::sweep_throughput_grid(
                               cfg, gen, parse_double_list(read_ratios, "read-ratio"),
                               parse_double_list(sharing_ratios, "sharing-ratio")));
      return 0;
    }

    if (sweep_split->parsed()) {
      SimConfig cfg = split_cfg.build();
      netmmu::GeneratorSpec gen;
      gen.working_set_pages = split_ws;
      gen.ops_per_blade = split_ops;
      gen.read_ratio = split_read;
      gen.sharing_ratio = split_share;
      gen.blades = cfg.compute_blades;
      gen.seed = cfg.seed;
      write_text(split_out, netmmu::sweep_splitting_tradeoff(
                                cfg, gen, parse_size_list(initial_sizes, "initial-size"),
                                parse_double_list(epoch_list, "epoch-ms")));
      return 0;
    }
  } catch (const netmmu::SimError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
