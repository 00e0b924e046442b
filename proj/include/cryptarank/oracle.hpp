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

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cryptarank/graph.hpp"

namespace cryptarank::oracle {

// Plaintext PageRank power iteration, the ground truth the encrypted
// protocol is checked against.
//
// new[i] = (1 - d)/m + d * sum over in-links j->i of ranks[j]/out_degree[j]
//
// Dangling nodes (out-degree zero) contribute nothing; with dangling nodes
// present the rank vector sums to less than one.

struct PageRankState {
  std::vector<double> ranks;
  int iteration = 0;
  double last_delta = std::numeric_limits<double>::infinity();

  bool converged(double tolerance) const { return last_delta < tolerance; }
};

inline std::vector<double> pagerank_step(const graph::AdjacencyGraph& g,
                                         const std::vector<double>& ranks,
                                         double damping) {
  if (!(damping > 0.0 && damping < 1.0)) {
    throw std::invalid_argument("damping must lie in (0, 1)");
  }
  const int m = g.node_count();
  if (static_cast<int>(ranks.size()) != m) {
    throw std::invalid_argument("rank vector length does not match the graph");
  }
  const auto& deg = g.out_degree();
  std::vector<double> next(m);
  const double teleport = (1.0 - damping) / m;
  for (int i = 0; i < m; ++i) {
    double inflow = 0.0;
    for (int j = 0; j < m; ++j) {
      if (g.at(j, i) && deg[j] > 0) {
        inflow += ranks[j] / static_cast<double>(deg[j]);
      }
    }
    next[i] = teleport + damping * inflow;
  }
  return next;
}

inline PageRankState pagerank(const graph::AdjacencyGraph& g,
                              double damping = 0.85, double tolerance = 1e-6,
                              int max_iter = 100) {
  if (!(tolerance > 0.0)) {
    throw std::invalid_argument("tolerance must be positive");
  }
  if (max_iter < 1) {
    throw std::invalid_argument("max_iter must be at least 1");
  }
  const int m = g.node_count();
  PageRankState state;
  state.ranks.assign(m, 1.0 / m);
  while (state.iteration < max_iter) {
    std::vector<double> next = pagerank_step(g, state.ranks, damping);
    double delta = 0.0;
    for (int i = 0; i < m; ++i) {
      delta += std::fabs(next[i] - state.ranks[i]);
    }
    state.ranks = std::move(next);
    state.last_delta = delta;
    ++state.iteration;
    if (delta < tolerance) break;
  }
  return state;
}

}  // namespace cryptarank::oracle
