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

// Test-only helpers shared by the unit and acceptance suites. The replay
// here must stay independent of the encrypted protocol path: it runs the
// same quantized update in plain integer arithmetic, no ciphertext ever
// involved.

#include <deque>
#include <vector>

#include "cryptarank/encoding.hpp"
#include "cryptarank/graph.hpp"
#include "cryptarank/oracle.hpp"

namespace cryptarank::testing {

struct ReplayResult {
  std::vector<oracle::PageRankState> history;
  oracle::PageRankState final_state;
  bool converged = false;
};

// Plaintext replay of the encrypted iteration with the same quantization:
// s_j = round(ranks[j]/deg[j] * scale) held as a plain integer, matrix
// entries multiplied in integer arithmetic, then decoded and summed in the
// same order the coordinator uses.
inline ReplayResult quantized_replay(const graph::AdjacencyGraph& g,
                                     const encoding::FixedPointCodec& codec,
                                     double damping, double tolerance,
                                     int max_iter) {
  const int m = g.node_count();
  const auto& deg = g.out_degree();

  ReplayResult result;
  oracle::PageRankState state;
  state.ranks.assign(m, 1.0 / m);

  for (int round = 1; round <= max_iter; ++round) {
    std::vector<mpz_class> scalars(m);
    for (int j = 0; j < m; ++j) {
      scalars[j] = deg[j] > 0
                       ? encoding::encode(codec, state.ranks[j] /
                                                     static_cast<double>(deg[j]))
                       : mpz_class(0);
    }
    std::vector<double> next(m);
    const double teleport = (1.0 - damping) / m;
    for (int i = 0; i < m; ++i) {
      double inflow = 0.0;
      for (int j = 0; j < m; ++j) {
        const mpz_class entry = g.at(j, i) ? scalars[j] : mpz_class(0);
        inflow += encoding::decode(codec, entry);
      }
      next[i] = teleport + damping * inflow;
    }
    double delta = 0.0;
    for (int i = 0; i < m; ++i) {
      delta += std::fabs(next[i] - state.ranks[i]);
    }
    state.ranks = std::move(next);
    state.last_delta = delta;
    ++state.iteration;
    result.history.push_back(state);
    if (delta < tolerance) {
      result.converged = true;
      break;
    }
  }
  result.final_state = state;
  return result;
}

// Strong connectivity: every node reachable from node 0 along edges and
// along reversed edges.
inline bool strongly_connected(const graph::AdjacencyGraph& g) {
  const int m = g.node_count();
  const auto reach = [&](bool reversed) {
    std::vector<bool> seen(m, false);
    std::deque<int> queue{0};
    seen[0] = true;
    int count = 1;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v = 0; v < m; ++v) {
        const bool edge = reversed ? g.at(v, u) : g.at(u, v);
        if (edge && !seen[v]) {
          seen[v] = true;
          ++count;
          queue.push_back(v);
        }
      }
    }
    return count == m;
  };
  return reach(false) && reach(true);
}

}  // namespace cryptarank::testing
