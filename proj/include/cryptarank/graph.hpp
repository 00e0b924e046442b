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
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cryptarank/entropy.hpp"
#include "cryptarank/errors.hpp"
#include "cryptarank/paillier.hpp"
#include <json.hpp>

namespace cryptarank::graph {

// Dense m x m binary adjacency matrix: at(i, j) == 1 iff edge i -> j.
// Loop-free by construction, so the diagonal is all zeros and the stored
// out-degree vector always equals the row sums.
class AdjacencyGraph {
 public:
  static AdjacencyGraph from_edge_list(
      const std::vector<std::pair<int, int>>& edges, int node_count) {
    if (node_count < 1) {
      throw std::invalid_argument("graph needs at least one node");
    }
    std::vector<std::uint8_t> matrix(
        static_cast<std::size_t>(node_count) * node_count, 0);
    for (const auto& [src, dst] : edges) {
      if (src < 0 || src >= node_count || dst < 0 || dst >= node_count) {
        throw std::invalid_argument(
            "edge (" + std::to_string(src) + ", " + std::to_string(dst) +
            ") has a node index outside [0, " + std::to_string(node_count) +
            ")");
      }
      if (src == dst) {
        throw std::invalid_argument(
            "self-loop at node " + std::to_string(src) +
            ": loop-free graphs have an all-zero diagonal");
      }
      // duplicate edges collapse into a single 1
      matrix[static_cast<std::size_t>(src) * node_count + dst] = 1;
    }
    return AdjacencyGraph(node_count, std::move(matrix));
  }

  // Off-diagonal entries drawn independently with the given probability;
  // deterministic for a fixed seed.
  static AdjacencyGraph random(int node_count, double edge_probability,
                               std::uint64_t seed) {
    if (node_count < 2) {
      throw std::invalid_argument("random graph needs at least two nodes");
    }
    if (!(edge_probability > 0.0 && edge_probability < 1.0)) {
      throw std::invalid_argument("edge probability must lie in (0, 1)");
    }
    std::mt19937_64 rng(seed);
    std::vector<std::uint8_t> matrix(
        static_cast<std::size_t>(node_count) * node_count, 0);
    for (int i = 0; i < node_count; ++i) {
      for (int j = 0; j < node_count; ++j) {
        if (i == j) continue;
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        matrix[static_cast<std::size_t>(i) * node_count + j] =
            u < edge_probability ? 1 : 0;
      }
    }
    return AdjacencyGraph(node_count, std::move(matrix));
  }

  int node_count() const { return m_; }

  std::uint8_t at(int i, int j) const {
    return matrix_[static_cast<std::size_t>(i) * m_ + j];
  }

  const std::vector<std::int64_t>& out_degree() const { return out_degree_; }

  std::int64_t edge_count() const {
    std::int64_t total = 0;
    for (const auto d : out_degree_) total += d;
    return total;
  }

  friend bool operator==(const AdjacencyGraph& a, const AdjacencyGraph& b) {
    return a.m_ == b.m_ && a.matrix_ == b.matrix_;
  }

 private:
  AdjacencyGraph(int m, std::vector<std::uint8_t> matrix)
      : m_(m), matrix_(std::move(matrix)) {
    out_degree_.assign(m_, 0);
    for (int i = 0; i < m_; ++i) {
      if (at(i, i) != 0) {
        throw std::invalid_argument("adjacency matrix has a nonzero diagonal");
      }
      std::int64_t deg = 0;
      for (int j = 0; j < m_; ++j) {
        const std::uint8_t e = at(i, j);
        if (e > 1) throw std::invalid_argument("adjacency entries must be 0/1");
        deg += e;
      }
      out_degree_[i] = deg;
    }
  }

  int m_;
  std::vector<std::uint8_t> matrix_;     // row-major
  std::vector<std::int64_t> out_degree_;
};

// Assignment of matrix columns ("features") to parties. Every column has
// exactly one owner and every party owns at least one column.
struct PartitionPlan {
  int party_count = 1;
  std::vector<int> assignment;  // column index -> owning party
  std::uint64_t seed = 0;

  int node_count() const { return static_cast<int>(assignment.size()); }

  std::vector<std::vector<int>> columns_per_party() const {
    std::vector<std::vector<int>> cols(party_count);
    for (int j = 0; j < node_count(); ++j) {
      cols[assignment[j]].push_back(j);
    }
    return cols;  // ascending per party since j is scanned in order
  }
};

// Uniform random assignment, then columns are moved from the largest
// parties onto empty ones until every party owns at least one. party_count
// of 1 is the degenerate single-party plan used by local runs.
inline PartitionPlan make_partition(int node_count, int party_count,
                                    std::uint64_t seed) {
  if (node_count < 1) {
    throw std::invalid_argument("partition needs at least one column");
  }
  if (party_count < 1 || party_count > node_count) {
    throw std::invalid_argument(
        "party count must lie in [1, node_count]; got " +
        std::to_string(party_count) + " for " + std::to_string(node_count) +
        " columns");
  }

  std::mt19937_64 rng(seed);
  const auto draw_below = [&rng](std::uint64_t k) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % k;
    std::uint64_t x;
    do {
      x = rng();
    } while (x >= limit);
    return x % k;
  };

  PartitionPlan plan;
  plan.party_count = party_count;
  plan.seed = seed;
  plan.assignment.resize(node_count);
  std::vector<int> load(party_count, 0);
  for (int j = 0; j < node_count; ++j) {
    const int owner = static_cast<int>(draw_below(party_count));
    plan.assignment[j] = owner;
    ++load[owner];
  }
  for (int p = 0; p < party_count; ++p) {
    if (load[p] > 0) continue;
    const int donor = static_cast<int>(
        std::max_element(load.begin(), load.end()) - load.begin());
    for (int j = node_count - 1; j >= 0; --j) {
      if (plan.assignment[j] == donor) {
        plan.assignment[j] = p;
        --load[donor];
        ++load[p];
        break;
      }
    }
  }
  return plan;
}

// One party's dense ciphertext view of its columns: every entry of every
// owned column is encrypted, zeros included, so the edge structure stays
// hidden.
struct EncryptedSlice {
  int party_id = 0;
  std::vector<int> column_indices;  // ascending global column indices
  // cipher_rows[i][c] encrypts matrix[i][column_indices[c]]
  std::vector<std::vector<paillier::Ciphertext>> cipher_rows;
  paillier::PublicKey public_key;
};

inline std::vector<EncryptedSlice> encrypt_slices(
    const AdjacencyGraph& graph, const PartitionPlan& plan,
    const paillier::PublicKey& pk, Entropy& rng) {
  if (plan.node_count() != graph.node_count()) {
    throw std::invalid_argument(
        "partition plan and graph disagree on the node count");
  }
  const int m = graph.node_count();
  const auto columns = plan.columns_per_party();

  std::vector<EncryptedSlice> slices;
  slices.reserve(plan.party_count);
  const mpz_class zero = 0;
  const mpz_class one = 1;
  for (int p = 0; p < plan.party_count; ++p) {
    EncryptedSlice slice;
    slice.party_id = p;
    slice.column_indices = columns[p];
    slice.public_key = pk;
    slice.cipher_rows.resize(m);
    for (int i = 0; i < m; ++i) {
      slice.cipher_rows[i].reserve(slice.column_indices.size());
      for (const int j : slice.column_indices) {
        slice.cipher_rows[i].push_back(
            paillier::encrypt(pk, graph.at(i, j) ? one : zero, rng));
      }
    }
    slices.push_back(std::move(slice));
  }
  return slices;
}

// Slice JSON: {"party_id": int, "columns": [int], "cipher_rows": [[hex]]}.
inline nlohmann::ordered_json slice_to_json(const EncryptedSlice& slice) {
  nlohmann::ordered_json j;
  j["party_id"] = slice.party_id;
  j["columns"] = slice.column_indices;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : slice.cipher_rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::array();
    for (const auto& ct : row) r.push_back(to_hex(ct.value));
    rows.push_back(std::move(r));
  }
  j["cipher_rows"] = std::move(rows);
  return j;
}

inline EncryptedSlice slice_from_json(const nlohmann::json& j,
                                      const paillier::PublicKey& pk) {
  EncryptedSlice slice;
  slice.public_key = pk;
  try {
    slice.party_id = j.at("party_id").get<int>();
    slice.column_indices = j.at("columns").get<std::vector<int>>();
    for (const auto& row : j.at("cipher_rows")) {
      std::vector<paillier::Ciphertext> r;
      r.reserve(row.size());
      for (const auto& cell : row) {
        r.push_back(paillier::Ciphertext{
            from_hex(cell.get<std::string>(), "cipher_rows"), pk.key_id});
      }
      slice.cipher_rows.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SerializationError(std::string("malformed slice JSON: ") + e.what());
  }
  return slice;
}

// Edge-list text format: '#' lines are comments, the first non-comment
// line holds the node count, every following line holds "src dst".
inline void write_edge_list(const AdjacencyGraph& graph, std::ostream& out) {
  out << "# directed graph: " << graph.node_count() << " nodes, "
      << graph.edge_count() << " edges\n";
  out << graph.node_count() << "\n";
  for (int i = 0; i < graph.node_count(); ++i) {
    for (int j = 0; j < graph.node_count(); ++j) {
      if (graph.at(i, j)) out << i << " " << j << "\n";
    }
  }
}

inline AdjacencyGraph read_edge_list(std::istream& in) {
  std::string line;
  int line_no = 0;
  int node_count = -1;
  std::vector<std::pair<int, int>> edges;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    if (node_count < 0) {
      if (!(fields >> node_count) || node_count < 1) {
        throw std::invalid_argument("edge list line " +
                                    std::to_string(line_no) +
                                    ": expected a positive node count");
      }
    } else {
      int src = 0, dst = 0;
      if (!(fields >> src >> dst)) {
        throw std::invalid_argument("edge list line " +
                                    std::to_string(line_no) +
                                    ": expected two node indices");
      }
      edges.emplace_back(src, dst);
    }
    std::string trailing;
    if (fields >> trailing) {
      throw std::invalid_argument("edge list line " + std::to_string(line_no) +
                                  ": unexpected trailing token '" + trailing +
                                  "'");
    }
  }
  if (node_count < 0) {
    throw std::invalid_argument("edge list has no node-count line");
  }
  return AdjacencyGraph::from_edge_list(edges, node_count);
}

inline AdjacencyGraph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open graph file: " + path);
  }
  return read_edge_list(in);
}

inline void save_edge_list(const AdjacencyGraph& graph,
                           const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::invalid_argument("cannot write graph file: " + path);
  }
  write_edge_list(graph, out);
}

}  // namespace cryptarank::graph
