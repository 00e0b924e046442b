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
#pragma once

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cryptarank/graph.hpp"
#include "cryptarank/protocol.hpp"

namespace cryptarank::bench {

// Timing grid over party size x key length, all cells on one fixed
// synthetic graph. Wall-clock is reported per phase because keygen,
// encryption, and iteration scale differently in the key length.

struct GridOptions {
  std::vector<int> party_sizes{3, 5, 7, 10};
  std::vector<int> key_sizes{128, 256, 512, 1024};
  // When non-empty, these exact (parties, key_bits) cells replace the
  // party_sizes x key_sizes cross product.
  std::vector<std::pair<int, int>> explicit_cells;
  int nodes = 20;
  double edge_probability = 0.2;
  std::uint64_t seed = 1;
  double damping = 0.85;
  int scale_base = 10;
  int scale_exp = 6;
  double tolerance = 1e-6;
  int max_iter = 100;

  std::vector<std::pair<int, int>> cells() const {
    if (!explicit_cells.empty()) return explicit_cells;
    std::vector<std::pair<int, int>> out;
    for (const int p : party_sizes) {
      for (const int b : key_sizes) out.emplace_back(p, b);
    }
    return out;
  }
};

struct Cell {
  int parties = 0;
  int key_bits = 0;
  protocol::PhaseTimings elapsed;
  int iterations = 0;
  bool converged = false;
  bool failed = false;
  std::string error;
};

// A cell failure is recorded and the grid moves on.
inline std::vector<Cell> run_grid(const GridOptions& opts,
                                  std::ostream* progress = nullptr) {
  const auto g =
      graph::AdjacencyGraph::random(opts.nodes, opts.edge_probability,
                                    opts.seed);
  std::vector<Cell> cells;
  for (const auto& [parties, bits] : opts.cells()) {
    Cell cell;
    cell.parties = parties;
    cell.key_bits = bits;
    if (progress != nullptr) {
      *progress << "bench: parties=" << parties << " key_bits=" << bits
                << " ..." << std::flush;
    }
    try {
      protocol::RunOptions run;
      run.party_count = parties;
      run.key_bits = bits;
      run.damping = opts.damping;
      run.scale_base = opts.scale_base;
      run.scale_exp = opts.scale_exp;
      run.tolerance = opts.tolerance;
      run.max_iter = opts.max_iter;
      run.seed = opts.seed;
      transport::InprocTransport transport;
      const auto result = protocol::run_protocol(g, run, transport);
      cell.elapsed = result.report.elapsed_s;
      cell.iterations = result.report.iterations;
      cell.converged = result.report.converged;
    } catch (const std::exception& e) {
      cell.failed = true;
      cell.error = e.what();
    }
    if (progress != nullptr) {
      if (cell.failed) {
        *progress << " FAILED: " << cell.error << "\n";
      } else {
        *progress << " " << cell.elapsed.total_s << " s\n";
      }
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace detail

inline std::string to_csv(const std::vector<Cell>& cells) {
  std::ostringstream out;
  out << "parties,key_bits,keygen_s,encrypt_s,iterate_s,total_s,iterations,"
         "converged\n";
  for (const auto& c : cells) {
    out << c.parties << "," << c.key_bits << ",";
    if (c.failed) {
      out << ",,,,0,false\n";
      continue;
    }
    out << detail::fmt(c.elapsed.keygen_s) << ","
        << detail::fmt(c.elapsed.encrypt_s) << ","
        << detail::fmt(c.elapsed.iterate_s) << ","
        << detail::fmt(c.elapsed.total_s) << "," << c.iterations << ","
        << (c.converged ? "true" : "false") << "\n";
  }
  return out.str();
}

// Markdown table of total seconds, one row per party size, plus the
// doubling ratios t(2l)/t(l) for adjacent key sizes. Rows and columns are
// derived from the cells actually run.
inline std::string to_markdown(const std::vector<Cell>& cells) {
  std::vector<int> party_sizes;
  std::vector<int> key_sizes;
  for (const auto& c : cells) {
    if (std::find(party_sizes.begin(), party_sizes.end(), c.parties) ==
        party_sizes.end()) {
      party_sizes.push_back(c.parties);
    }
    if (std::find(key_sizes.begin(), key_sizes.end(), c.key_bits) ==
        key_sizes.end()) {
      key_sizes.push_back(c.key_bits);
    }
  }
  const auto find_cell = [&cells](int parties, int bits) -> const Cell* {
    for (const auto& c : cells) {
      if (c.parties == parties && c.key_bits == bits) return &c;
    }
    return nullptr;
  };

  std::ostringstream out;
  out << "| parties |";
  std::size_t columns = 1;
  for (const int bits : key_sizes) {
    out << " " << bits << " bit |";
    ++columns;
  }
  for (std::size_t i = 1; i < key_sizes.size(); ++i) {
    out << " t(" << key_sizes[i] << ")/t(" << key_sizes[i - 1] << ") |";
    ++columns;
  }
  out << "\n|";
  for (std::size_t i = 0; i < columns; ++i) out << "---|";
  out << "\n";
  for (const int parties : party_sizes) {
    out << "| " << parties << " |";
    for (const int bits : key_sizes) {
      const Cell* c = find_cell(parties, bits);
      if (c == nullptr || c->failed) {
        out << " - |";
      } else {
        out << " " << detail::fmt(c->elapsed.total_s) << " |";
      }
    }
    for (std::size_t i = 1; i < key_sizes.size(); ++i) {
      const Cell* lo = find_cell(parties, key_sizes[i - 1]);
      const Cell* hi = find_cell(parties, key_sizes[i]);
      if (lo == nullptr || hi == nullptr || lo->failed || hi->failed ||
          lo->elapsed.total_s <= 0.0) {
        out << " - |";
      } else {
        out << " " << detail::fmt(hi->elapsed.total_s / lo->elapsed.total_s)
            << " |";
      }
    }
    out << "\n";
  }
  return out.str();
}

inline nlohmann::ordered_json to_json(const std::vector<Cell>& cells) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& c : cells) {
    nlohmann::ordered_json j;
    j["parties"] = c.parties;
    j["key_bits"] = c.key_bits;
    j["keygen_s"] = c.elapsed.keygen_s;
    j["encrypt_s"] = c.elapsed.encrypt_s;
    j["iterate_s"] = c.elapsed.iterate_s;
    j["total_s"] = c.elapsed.total_s;
    j["iterations"] = c.iterations;
    j["converged"] = c.converged;
    j["failed"] = c.failed;
    if (c.failed) j["error"] = c.error;
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace cryptarank::bench
