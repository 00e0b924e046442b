/*
 * Copyright 2026 The cryptarank Authors
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// cryptarank: Paillier-encrypted multi-party PageRank.
//
// Subcommands:
//   gen-graph   write a random directed graph as an edge-list file
//   run         execute the encrypted protocol, emit a JSON run report
//   verify      run protocol and plaintext oracle side by side, compare
//   bench       timing grid over party size x key length (CSV + markdown)
//
// Exit codes: 0 success/converged, 2 configuration error, 3 max
// iterations reached without convergence, 4 transport error, 5 codec
// overflow.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "cryptarank/bench.hpp"
#include "cryptarank/graph.hpp"
#include "cryptarank/oracle.hpp"
#include "cryptarank/protocol.hpp"
#include "cryptarank/transport.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBoundExceeded = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitTransport = 4;
constexpr int kExitOverflow = 5;

struct RunConfig {
  std::string graph_path;
  int key_bits = 512;
  int parties = 3;
  double damping = 0.85;
  int scale_base = 10;
  int scale_exp = 6;
  double tolerance = 1e-6;
  int max_iter = 100;
  std::uint64_t seed = 1;
  std::string transport = "inproc";
  std::string output = "-";
  std::string transcript_path;
};

void add_run_options(CLI::App* cmd, RunConfig* cfg) {
  cmd->add_option("--graph", cfg->graph_path, "edge-list graph file")
      ->required();
  cmd->add_option("--key-bits", cfg->key_bits, "Paillier key size in bits");
  cmd->add_option("--parties", cfg->parties, "number of parties");
  cmd->add_option("--damping", cfg->damping, "damping factor in (0,1)");
  cmd->add_option("--scale-base", cfg->scale_base,
                  "fixed-point base (2 or 10)");
  cmd->add_option("--scale-exp", cfg->scale_exp, "fixed-point exponent");
  cmd->add_option("--tol", cfg->tolerance, "L1 convergence threshold");
  cmd->add_option("--max-iter", cfg->max_iter, "iteration cap");
  cmd->add_option("--seed", cfg->seed, "partition seed");
  cmd->add_option("--transport", cfg->transport, "inproc or tcp")
      ->check(CLI::IsMember({"inproc", "tcp"}));
  cmd->add_option("--output", cfg->output,
                  "report destination: a path, '-' or 'json' for stdout");
  cmd->add_option("--transcript", cfg->transcript_path,
                  "write the full message transcript to this path");
}

// CRYPTARANK_SEED, when set, overrides --seed for every subcommand.
bool apply_seed_env(std::uint64_t* seed) {
  const char* env = std::getenv("CRYPTARANK_SEED");
  if (env == nullptr) return true;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0') {
    std::cerr << "CRYPTARANK_SEED is not a valid integer: " << env << "\n";
    return false;
  }
  *seed = static_cast<std::uint64_t>(v);
  return true;
}

cryptarank::protocol::RunOptions to_run_options(const RunConfig& cfg) {
  cryptarank::protocol::RunOptions opts;
  opts.party_count = cfg.parties;
  opts.key_bits = cfg.key_bits;
  opts.damping = cfg.damping;
  opts.scale_base = cfg.scale_base;
  opts.scale_exp = cfg.scale_exp;
  opts.tolerance = cfg.tolerance;
  opts.max_iter = cfg.max_iter;
  opts.seed = cfg.seed;
  return opts;
}

std::unique_ptr<cryptarank::transport::Transport> make_transport(
    const std::string& name) {
  if (name == "tcp") {
    return std::make_unique<cryptarank::transport::TcpTransport>();
  }
  return std::make_unique<cryptarank::transport::InprocTransport>();
}

void emit(const std::string& text, const std::string& output) {
  if (output == "-" || output == "json") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(output, std::ios::binary);
  if (!out) {
    throw std::invalid_argument("cannot write output file: " + output);
  }
  out << text << "\n";
}

int cmd_gen_graph(int nodes, double prob, std::uint64_t seed,
                  const std::string& out_path) {
  const auto g = cryptarank::graph::AdjacencyGraph::random(nodes, prob, seed);
  cryptarank::graph::save_edge_list(g, out_path);
  std::cerr << "wrote " << g.node_count() << " nodes, " << g.edge_count()
            << " edges to " << out_path << "\n";
  return kExitOk;
}

int cmd_run(const RunConfig& cfg) {
  const auto g = cryptarank::graph::load_edge_list(cfg.graph_path);
  auto transport = make_transport(cfg.transport);
  const auto result =
      cryptarank::protocol::run_protocol(g, to_run_options(cfg), *transport);
  if (!cfg.transcript_path.empty()) {
    std::ofstream out(cfg.transcript_path, std::ios::binary);
    if (!out) {
      throw std::invalid_argument("cannot write transcript file: " +
                                  cfg.transcript_path);
    }
    out << result.transcript.to_json().dump(2) << "\n";
  }
  emit(result.report.to_json().dump(), cfg.output);
  return result.report.converged ? kExitOk : kExitNoConvergence;
}

int cmd_verify(const RunConfig& cfg) {
  const auto g = cryptarank::graph::load_edge_list(cfg.graph_path);
  auto transport = make_transport(cfg.transport);
  const auto report = cryptarank::protocol::verify_against_oracle(
      g, to_run_options(cfg), *transport);
  emit(report.to_json().dump(), cfg.output);
  std::cerr << "max-abs diff " << report.max_abs_diff << ", L1 diff "
            << report.l1_diff << ", bound " << report.bound << " -> "
            << (report.pass ? "PASS" : "FAIL") << "\n";
  return report.pass ? kExitOk : kExitBoundExceeded;
}

std::vector<std::pair<int, int>> parse_grid(const std::string& spec) {
  std::vector<std::pair<int, int>> cells;
  if (spec == "default") return cells;
  std::istringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto x = item.find('x');
    if (x == std::string::npos) {
      throw std::invalid_argument("bad --grid cell '" + item +
                                  "': expected PARTIESxBITS, e.g. 3x128");
    }
    try {
      cells.emplace_back(std::stoi(item.substr(0, x)),
                         std::stoi(item.substr(x + 1)));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad --grid cell '" + item + "'");
    }
  }
  if (cells.empty()) {
    throw std::invalid_argument("--grid names no cells");
  }
  return cells;
}

int cmd_bench(const cryptarank::bench::GridOptions& grid,
              const std::string& csv_path, const std::string& output) {
  const auto cells = cryptarank::bench::run_grid(grid, &std::cerr);
  const std::string csv = cryptarank::bench::to_csv(cells);
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) {
      throw std::invalid_argument("cannot write CSV file: " + csv_path);
    }
    out << csv;
  }
  std::cerr << "wrote " << csv_path << "\n";
  if (output == "json") {
    std::cout << cryptarank::bench::to_json(cells).dump() << "\n";
  } else {
    std::cout << cryptarank::bench::to_markdown(cells);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Paillier-encrypted multi-party PageRank"};
  app.require_subcommand(1);

  // gen-graph
  int gg_nodes = 20;
  double gg_prob = 0.2;
  std::uint64_t gg_seed = 1;
  std::string gg_out;
  auto* gen = app.add_subcommand("gen-graph",
                                 "write a random directed graph edge list");
  gen->add_option("--nodes", gg_nodes, "node count");
  gen->add_option("--prob", gg_prob, "edge probability in (0,1)");
  gen->add_option("--seed", gg_seed, "generator seed");
  gen->add_option("--out", gg_out, "output path")->required();

  // run / verify
  RunConfig run_cfg;
  auto* run = app.add_subcommand("run", "execute the encrypted protocol");
  add_run_options(run, &run_cfg);

  RunConfig verify_cfg;
  auto* verify =
      app.add_subcommand("verify", "compare protocol against the oracle");
  add_run_options(verify, &verify_cfg);

  // bench
  cryptarank::bench::GridOptions grid;
  std::string bench_grid = "default";
  std::string bench_csv = "cryptarank_bench.csv";
  std::string bench_output = "-";
  auto* bench = app.add_subcommand("bench",
                                   "timing grid over parties x key bits");
  bench->add_option("--grid", bench_grid,
                    "'default' (3,5,7,10 x 128..1024) or cells like 3x128");
  bench->add_option("--nodes", grid.nodes, "benchmark graph size");
  bench->add_option("--prob", grid.edge_probability, "edge probability");
  bench->add_option("--seed", grid.seed, "graph + partition seed");
  bench->add_option("--damping", grid.damping, "damping factor");
  bench->add_option("--scale-base", grid.scale_base, "fixed-point base");
  bench->add_option("--scale-exp", grid.scale_exp, "fixed-point exponent");
  bench->add_option("--tol", grid.tolerance, "L1 convergence threshold");
  bench->add_option("--max-iter", grid.max_iter, "iteration cap");
  bench->add_option("--csv", bench_csv, "CSV output path");
  bench->add_option("--output", bench_output,
                    "'-' for a markdown table, 'json' for JSON on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (gen->parsed()) {
      if (!apply_seed_env(&gg_seed)) return kExitConfig;
      return cmd_gen_graph(gg_nodes, gg_prob, gg_seed, gg_out);
    }
    if (run->parsed()) {
      if (!apply_seed_env(&run_cfg.seed)) return kExitConfig;
      return cmd_run(run_cfg);
    }
    if (verify->parsed()) {
      if (!apply_seed_env(&verify_cfg.seed)) return kExitConfig;
      return cmd_verify(verify_cfg);
    }
    if (bench->parsed()) {
      if (!apply_seed_env(&grid.seed)) return kExitConfig;
      grid.explicit_cells = parse_grid(bench_grid);
      return cmd_bench(grid, bench_csv, bench_output);
    }
  } catch (const cryptarank::OverflowError& e) {
    std::cerr << "codec overflow: " << e.what() << "\n";
    return kExitOverflow;
  } catch (const cryptarank::TransportError& e) {
    std::cerr << "transport error: " << e.what() << "\n";
    return kExitTransport;
  } catch (const cryptarank::ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return kExitTransport;
  } catch (const cryptarank::SerializationError& e) {
    std::cerr << "wire format error: " << e.what() << "\n";
    return kExitTransport;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
